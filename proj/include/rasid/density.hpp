#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "rasid/kernels.hpp"

namespace rasid {

using kernels::epanechnikov;
using kernels::epanechnikov_cdf;

/// Scott's rule for the Epanechnikov kernel: 2.345 * sigma * n^(-1/5).
double scott_bandwidth(double sigma_hat, std::size_t n);

/// Weighted Epanechnikov kernel density estimate over scalar feature values.
///
/// Immutable once built. Weights are normalized to sum to one; with uniform
/// weights the estimate is the classical (1 / nh) sum V((x - x_i) / h).
class KdeModel {
 public:
  /// Fits a model; bandwidth from Scott's rule on the weighted standard
  /// deviation (reliability-weight unbiased form, which is the n-1 sample
  /// estimate for uniform weights). Constant inputs get
  /// h = max(0.01, 1e-3 * |mean|). Throws DataError on empty input or
  /// non-positive weights.
  static KdeModel fit(std::vector<double> points,
                      std::optional<std::vector<double>> weights = std::nullopt);

  /// Rebuilds a model with an explicit bandwidth, e.g. from a saved profile.
  static KdeModel from_parts(std::vector<double> points, std::vector<double> weights,
                             double bandwidth);

  [[nodiscard]] double pdf(double x) const { return kernels::mixture_pdf(mixture(), x); }
  [[nodiscard]] double cdf(double x) const { return kernels::mixture_cdf(mixture(), x); }

  /// Leftmost x with cdf(x) >= p, by bisection on the support.
  [[nodiscard]] double quantile(double p) const;

  /// Batch evaluation through the OpenMP kernels.
  [[nodiscard]] std::vector<double> pdf(std::span<const double> xs) const;
  [[nodiscard]] std::vector<double> cdf(std::span<const double> xs) const;

  [[nodiscard]] std::span<const double> points() const { return points_; }
  [[nodiscard]] std::span<const double> weights() const { return weights_; }
  [[nodiscard]] double bandwidth() const { return bandwidth_; }
  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] double support_lo() const { return lo_ - bandwidth_; }
  [[nodiscard]] double support_hi() const { return hi_ + bandwidth_; }
  [[nodiscard]] kernels::Mixture mixture() const { return {points_, weights_, bandwidth_}; }

 private:
  KdeModel(std::vector<double> points, std::vector<double> weights, double bandwidth);

  std::vector<double> points_;
  std::vector<double> weights_;
  double bandwidth_ = 1.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

/// Weighted mean and reliability-weighted standard deviation.
std::pair<double, double> weighted_mean_std(std::span<const double> xs, std::span<const double> ws);

nlohmann::json to_json(const KdeModel& m);
KdeModel kde_from_json(const nlohmann::json& doc);

struct KsResult {
  double statistic = 0.0;
  bool accept_at_0_05 = true;
  double critical = 0.0;  // 1.358 * sqrt((m + n) / (m n))
};

/// Two-sample Kolmogorov-Smirnov test at the 0.05 level (asymptotic critical value).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

}  // namespace rasid
