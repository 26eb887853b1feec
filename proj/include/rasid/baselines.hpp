#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rasid/trace.hpp"

namespace rasid {

/// Per-tick alarm series of any detector, aligned to a tick grid.
struct AlarmSeries {
  std::vector<double> t;
  std::vector<bool> alarm;
};

// ---------------------------------------------------------------------------
// moving average

struct MovingAverageCfg {
  std::size_t short_len = 5;
  std::size_t long_len = 60;
  double threshold = 1.0;  // dB

  void validate() const;
};

/// |mean(last short_len) - mean(last long_len)| > threshold; `history` ends at
/// the current sample.
bool moving_average_step(const MovingAverageCfg& cfg, std::span<const double> history);

// ---------------------------------------------------------------------------
// moving variance

struct MovingVarianceCfg {
  std::size_t window_len = 5;
  double silence_variance = 1.0;  // dBm^2, from training
  double threshold = 1.0;         // dBm^2

  void validate() const;
};

/// sample_variance(window) - silence_variance > threshold.
bool moving_variance_step(const MovingVarianceCfg& cfg, std::span<const double> window);

// ---------------------------------------------------------------------------
// maximum likelihood classification

/// Per-stream integer-dBm histograms with add-one smoothing over a fixed
/// support, one set per profile. Profile 0 is silence.
class MleModel {
 public:
  static constexpr int kLowDbm = -120;
  static constexpr int kHighDbm = 0;

  /// Silence comes from silence-labelled intervals, motion profiles from
  /// motion intervals grouped by their `loc` tag (untagged motion becomes
  /// "motion").
  static MleModel train(const RssTrace& trace, const LabelTrack& labels);

  [[nodiscard]] const std::vector<std::string>& profile_names() const { return names_; }
  [[nodiscard]] const std::vector<StreamId>& streams() const { return streams_; }
  /// log p(rss | profile) for one stream.
  [[nodiscard]] double log_likelihood(std::size_t profile, std::size_t stream, double rss) const;

  /// Builds a model from raw counts, [profile][stream][bin]; smoothing applied here.
  static MleModel from_counts(std::vector<std::string> names, std::vector<StreamId> streams,
                              const std::vector<std::vector<std::vector<double>>>& counts);

 private:
  static std::size_t bin(double rss);

  std::vector<std::string> names_;
  std::vector<StreamId> streams_;
  std::vector<std::vector<std::vector<double>>> log_p_;  // [profile][stream][bin]
};

struct MleDecision {
  std::size_t profile = 0;
  bool alarm = false;
};

/// argmax over profiles of the summed per-stream log likelihoods; ties go to silence.
MleDecision mle_classify(const MleModel& model, std::span<const double> rss_vector);

// ---------------------------------------------------------------------------
// parametric chi-square model

struct ParametricModel {
  double sigma2 = 1.0;  // population variance, dBm^2
  std::size_t l = 5;
  double alpha = 0.01;
};

/// Quantile of the chi-square distribution, by bracketed root finding on the
/// regularized lower incomplete gamma to 1e-10.
double chi_square_quantile(double dof, double p);

/// Upper bound on the sample variance: sigma2 * Q(l-1, 1-alpha) / (l-1).
double chi_square_bound(const ParametricModel& model);

// ---------------------------------------------------------------------------
// calibration and runners over traces

struct BaselineParams {
  MovingAverageCfg moving_average;
  MovingVarianceCfg moving_variance;
  double target_false_alarm = 0.01;  // per window, per stream
};

BaselineParams baseline_params_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const BaselineParams& p);

/// Empirical (1 - target) quantile of the detector statistic on training silence.
std::map<StreamId, MovingAverageCfg> calibrate_moving_average(const RssTrace& training,
                                                              const MovingAverageCfg& base,
                                                              double target_false_alarm);
std::map<StreamId, MovingVarianceCfg> calibrate_moving_variance(const RssTrace& training,
                                                                const MovingVarianceCfg& base,
                                                                double target_false_alarm);

/// Global alarm = any stream alarms; ticks without enough history do not alarm.
AlarmSeries run_moving_average(const RssTrace& trace, const std::map<StreamId, MovingAverageCfg>& cfgs,
                               double rate_hz = 1.0);
AlarmSeries run_moving_variance(const RssTrace& trace, const std::map<StreamId, MovingVarianceCfg>& cfgs,
                                double rate_hz = 1.0);
AlarmSeries run_mle(const RssTrace& trace, const MleModel& model, double rate_hz = 1.0);

/// Basic detection with chi-square bounds; sigma2 per stream estimated from
/// the training samples.
AlarmSeries run_parametric(const RssTrace& trace, const RssTrace& training, std::size_t l,
                           double alpha, double rate_hz = 1.0);

}  // namespace rasid
