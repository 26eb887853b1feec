#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rasid/geometry.hpp"

// Data-parallel inner loops. Each kernel has a plain serial version, kept as
// the reference the tests compare against, and an OpenMP version used on the
// hot paths. Both must produce identical results: every output element is a
// sum computed in the same order by a single thread.
namespace rasid::kernels {

/// Weighted Epanechnikov mixture: sum_i w_i / h * V((x - c_i) / h).
struct Mixture {
  std::span<const double> centers;
  std::span<const double> weights;
  double bandwidth = 1.0;
};

/// Anomaly-weighted segments for region heat scoring.
struct HeatSource {
  Segment segment;
  double weight = 0.0;  // max(0, score - 1)
};

/// Regular grid: value(ix, iy) at (x0 + ix * res, y0 + iy * res), row-major in y.
struct GridSpec {
  double x0 = 0.0;
  double y0 = 0.0;
  double res = 1.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
};

inline double epanechnikov(double q) {
  return (q >= -1.0 && q <= 1.0) ? 0.75 * (1.0 - q * q) : 0.0;
}

/// Integral of the Epanechnikov kernel from -inf to u.
inline double epanechnikov_cdf(double u) {
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return 0.25 * (2.0 + 3.0 * u - u * u * u);
}

inline double mixture_pdf(const Mixture& m, double x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.centers.size(); ++i) {
    acc += m.weights[i] * epanechnikov((x - m.centers[i]) / m.bandwidth);
  }
  return acc / m.bandwidth;
}

inline double mixture_cdf(const Mixture& m, double x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.centers.size(); ++i) {
    acc += m.weights[i] * epanechnikov_cdf((x - m.centers[i]) / m.bandwidth);
  }
  return acc;
}

namespace serial {
void pdf(const Mixture& m, std::span<const double> xs, std::span<double> out);
void cdf(const Mixture& m, std::span<const double> xs, std::span<double> out);
void heat_grid(std::span<const HeatSource> sources, double decay_m, const GridSpec& grid,
               std::span<double> out);
/// Symmetric k x k matrix of minimum segment distances, row-major.
void segment_distances(std::span<const Segment> segments, std::span<double> out);
}  // namespace serial

namespace parallel {
void pdf(const Mixture& m, std::span<const double> xs, std::span<double> out);
void cdf(const Mixture& m, std::span<const double> xs, std::span<double> out);
void heat_grid(std::span<const HeatSource> sources, double decay_m, const GridSpec& grid,
               std::span<double> out);
void segment_distances(std::span<const Segment> segments, std::span<double> out);
}  // namespace parallel

}  // namespace rasid::kernels
