#include "rasid/kernels.hpp"

#include <cmath>
#include <cstdint>

namespace rasid::kernels {

namespace {

double heat_at(std::span<const HeatSource> sources, double decay_m, Point p) {
  double acc = 0.0;
  for (const auto& s : sources) {
    if (s.weight <= 0.0) continue;
    acc += s.weight * std::exp(-point_segment_distance(p, s.segment) / decay_m);
  }
  return acc;
}

Point grid_point(const GridSpec& g, std::size_t ix, std::size_t iy) {
  return Point{g.x0 + static_cast<double>(ix) * g.res, g.y0 + static_cast<double>(iy) * g.res};
}

}  // namespace

namespace serial {

void pdf(const Mixture& m, std::span<const double> xs, std::span<double> out) {
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = mixture_pdf(m, xs[i]);
}

void cdf(const Mixture& m, std::span<const double> xs, std::span<double> out) {
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = mixture_cdf(m, xs[i]);
}

void heat_grid(std::span<const HeatSource> sources, double decay_m, const GridSpec& grid,
               std::span<double> out) {
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      out[iy * grid.nx + ix] = heat_at(sources, decay_m, grid_point(grid, ix, iy));
    }
  }
}

void segment_distances(std::span<const Segment> segments, std::span<double> out) {
  const std::size_t k = segments.size();
  for (std::size_t i = 0; i < k; ++i) {
    out[i * k + i] = 0.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      const double d = segment_distance(segments[i], segments[j]);
      out[i * k + j] = d;
      out[j * k + i] = d;
    }
  }
}

}  // namespace serial

namespace parallel {

void pdf(const Mixture& m, std::span<const double> xs, std::span<double> out) {
  const auto n = static_cast<std::int64_t>(xs.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = mixture_pdf(m, xs[i]);
}

void cdf(const Mixture& m, std::span<const double> xs, std::span<double> out) {
  const auto n = static_cast<std::int64_t>(xs.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = mixture_cdf(m, xs[i]);
}

void heat_grid(std::span<const HeatSource> sources, double decay_m, const GridSpec& grid,
               std::span<double> out) {
  const auto cells = static_cast<std::int64_t>(grid.nx * grid.ny);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < cells; ++c) {
    const auto ix = static_cast<std::size_t>(c) % grid.nx;
    const auto iy = static_cast<std::size_t>(c) / grid.nx;
    out[c] = heat_at(sources, decay_m, grid_point(grid, ix, iy));
  }
}

void segment_distances(std::span<const Segment> segments, std::span<double> out) {
  const auto k = static_cast<std::int64_t>(segments.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < k; ++i) {
    for (std::int64_t j = 0; j < k; ++j) {
      out[i * k + j] = i == j ? 0.0 : segment_distance(segments[i], segments[j]);
    }
  }
}

}  // namespace parallel

}  // namespace rasid::kernels
