#include "rasid/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rasid/error.hpp"

namespace rasid {

using nlohmann::json;

double scott_bandwidth(double sigma_hat, std::size_t n) {
  if (!(sigma_hat > 0.0) || n == 0) throw DataError("scott_bandwidth needs sigma > 0 and n >= 1");
  return 2.345 * sigma_hat * std::pow(static_cast<double>(n), -0.2);
}

std::pair<double, double> weighted_mean_std(std::span<const double> xs, std::span<const double> ws) {
  double mean = 0.0;
  double sum_w2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean += ws[i] * xs[i];
    sum_w2 += ws[i] * ws[i];
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) ss += ws[i] * (xs[i] - mean) * (xs[i] - mean);
  const double denom = 1.0 - sum_w2;
  if (denom <= 0.0) return {mean, 0.0};
  return {mean, std::sqrt(ss / denom)};
}

KdeModel::KdeModel(std::vector<double> points, std::vector<double> weights, double bandwidth)
    : points_(std::move(points)), weights_(std::move(weights)), bandwidth_(bandwidth) {
  const auto [lo, hi] = std::minmax_element(points_.begin(), points_.end());
  lo_ = *lo;
  hi_ = *hi;
}

namespace {

std::vector<double> normalized(std::vector<double> w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= total;
  return w;
}

void check_points(const std::vector<double>& points) {
  if (points.empty()) throw DataError("kde: no points");
  for (double p : points) {
    if (!std::isfinite(p)) throw DataError("kde: non-finite point");
  }
}

}  // namespace

KdeModel KdeModel::fit(std::vector<double> points, std::optional<std::vector<double>> weights) {
  check_points(points);
  std::vector<double> w;
  if (weights) {
    if (weights->size() != points.size()) throw DataError("kde: weights and points differ in length");
    for (double v : *weights) {
      if (!(v > 0.0) || !std::isfinite(v)) throw DataError("kde: weights must be positive");
    }
    w = normalized(std::move(*weights));
  } else {
    w.assign(points.size(), 1.0 / static_cast<double>(points.size()));
  }
  const auto [mean, sd] = weighted_mean_std(points, w);
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end());
  const double h = (*lo < *hi && sd > 0.0) ? scott_bandwidth(sd, points.size()) : std::max(0.01, 1e-3 * std::abs(mean));
  return KdeModel(std::move(points), std::move(w), h);
}

KdeModel KdeModel::from_parts(std::vector<double> points, std::vector<double> weights,
                              double bandwidth) {
  check_points(points);
  if (weights.size() != points.size()) throw DataError("kde: weights and points differ in length");
  for (double v : weights) {
    if (!(v > 0.0)) throw DataError("kde: weights must be positive");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw DataError("kde: weights must sum to 1");
  if (!(bandwidth > 0.0)) throw DataError("kde: bandwidth must be > 0");
  return KdeModel(std::move(points), std::move(weights), bandwidth);
}

double KdeModel::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DataError("kde: quantile needs 0 < p < 1");
  double lo = support_lo();
  double hi = support_hi();
  // invariant: cdf(lo) < p <= cdf(hi)
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

std::vector<double> KdeModel::pdf(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  kernels::parallel::pdf(mixture(), xs, out);
  return out;
}

std::vector<double> KdeModel::cdf(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  kernels::parallel::cdf(mixture(), xs, out);
  return out;
}

json to_json(const KdeModel& m) {
  return json{{"points", std::vector<double>(m.points().begin(), m.points().end())},
              {"weights", std::vector<double>(m.weights().begin(), m.weights().end())},
              {"bandwidth", m.bandwidth()}};
}

KdeModel kde_from_json(const json& doc) {
  try {
    return KdeModel::from_parts(doc.at("points").get<std::vector<double>>(),
                                doc.at("weights").get<std::vector<double>>(),
                                doc.at("bandwidth").get<double>());
  } catch (const json::exception& e) {
    throw DataError(std::string("kde document: ") + e.what());
  }
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DataError("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double m = static_cast<double>(x.size());
  const double n = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  // step both ECDFs past each distinct value, then compare
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / m - static_cast<double>(j) / n));
  }
  KsResult r;
  r.statistic = d;
  r.critical = 1.358 * std::sqrt((m + n) / (m * n));
  r.accept_at_0_05 = d <= r.critical;
  return r;
}

}  // namespace rasid
