#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rasid/density.hpp"
#include "rasid/trace.hpp"

namespace rasid {

enum class FeatureKind { mean, std_dev, variance };

std::string to_string(FeatureKind kind);
FeatureKind parse_feature_kind(const std::string& text);

/// Dispersion features only deviate upward, so they carry a single bound.
inline bool is_dispersion(FeatureKind kind) { return kind != FeatureKind::mean; }

/// Window feature. Variance uses the l-1 denominator.
double feature(std::span<const double> window, FeatureKind kind);

/// Euclidean distance between frequency-normalized histograms of a and b
/// over shared, equal-width bins spanning both ranges.
double histogram_distance(std::span<const double> a, std::span<const double> b,
                          std::size_t bins = 20);

/// Linear recency weights i / (n(n+1)/2), oldest first.
std::vector<double> linear_weights(std::size_t n);

/// Silence model of one stream.
///
/// For dispersion features `upper` is the (1 - alpha) quantile and `lower` is
/// empty. For the mean feature the bounds are the alpha/2 and 1 - alpha/2
/// quantiles and `center` is the median.
struct NormalProfile {
  StreamId stream;
  FeatureKind feature = FeatureKind::variance;
  KdeModel model;
  double alpha = 0.01;
  double upper = 0.0;
  std::optional<double> lower;
  double center = 0.0;
  std::size_t capacity = 0;
  std::size_t window = 0;   // training window length l, 0 when unknown
  std::size_t updates = 0;  // accepted update groups

  /// Anomaly score: x / upper for dispersion features; for the mean feature
  /// the distance from the median relative to the bound on that side.
  [[nodiscard]] double score(double x) const;
  [[nodiscard]] bool anomalous(double x) const;
};

/// Builds a profile from already extracted feature values (uniform weights).
NormalProfile make_profile(const StreamId& stream, FeatureKind kind, std::vector<double> points,
                           double alpha, std::size_t window = 0);

/// Offline phase: every sliding window of the training samples becomes one
/// feature point. Needs at least l+1 samples.
NormalProfile build_profile(const RssTrace& training, const StreamId& stream, std::size_t l,
                            double alpha, FeatureKind kind = FeatureKind::variance);

struct UpdatePolicy {
  std::size_t l_update = 15;
};

struct ScoredFeature {
  double x = 0.0;
  double score = 0.0;
};

/// Online update: a group whose mean score is below one replaces the oldest
/// l_update points; linear recency weights, bandwidth and bounds are then
/// recomputed. Otherwise the profile comes back unchanged.
NormalProfile maybe_update(const NormalProfile& profile, std::span<const ScoredFeature> group,
                           const UpdatePolicy& policy);

nlohmann::json to_json(const NormalProfile& p);
NormalProfile profile_from_json(const nlohmann::json& doc);

/// All profiles of one deployment, in stream order.
using ProfileBundle = std::vector<NormalProfile>;

void save_bundle(const std::filesystem::path& path, const ProfileBundle& bundle);
ProfileBundle load_bundle(const std::filesystem::path& path);
const NormalProfile* find_profile(const ProfileBundle& bundle, const StreamId& stream);

// ---------------------------------------------------------------------------
// feature study

struct FeatureStudyRow {
  std::size_t l = 0;
  double mean_distance = 0.0;  // silence vs motion histograms of the window mean
  double std_distance = 0.0;   // same for the window standard deviation
};

/// Histogram separation of the mean and std-dev features between a silence
/// and a motion recording of one stream, for each window length.
std::vector<FeatureStudyRow> feature_study(std::span<const double> silence,
                                           std::span<const double> motion,
                                           std::span<const std::size_t> window_lengths,
                                           std::size_t bins = 20);

}  // namespace rasid
