#include <benchmark/benchmark.h>

#include <vector>

#include "rasid/detector.hpp"
#include "rasid/experiment.hpp"
#include "rasid/kernels.hpp"
#include "rasid/random.hpp"

using namespace rasid;

namespace {

struct MixtureData {
  std::vector<double> centers, weights, xs, out;
  kernels::Mixture mixture() const { return {centers, weights, 0.3}; }
};

MixtureData mixture_data(std::size_t n, std::size_t queries) {
  MixtureData d;
  Rng rng(1);
  for (std::size_t i = 0; i < n; ++i) d.centers.push_back(rng.normal(2, 1));
  d.weights = linear_weights(n);
  for (std::size_t i = 0; i < queries; ++i) d.xs.push_back(-2 + 8.0 * i / queries);
  d.out.resize(queries);
  return d;
}

template <bool Parallel>
void BM_pdf(benchmark::State& state) {
  auto d = mixture_data(state.range(0), 4096);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::parallel::pdf(d.mixture(), d.xs, d.out);
    else kernels::serial::pdf(d.mixture(), d.xs, d.out);
    benchmark::DoNotOptimize(d.out.data());
  }
}

template <bool Parallel>
void BM_cdf(benchmark::State& state) {
  auto d = mixture_data(state.range(0), 4096);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::parallel::cdf(d.mixture(), d.xs, d.out);
    else kernels::serial::cdf(d.mixture(), d.xs, d.out);
    benchmark::DoNotOptimize(d.out.data());
  }
}

std::vector<kernels::HeatSource> heat_sources() {
  const auto geo = office_geometry();
  std::vector<kernels::HeatSource> out;
  double w = 0.5;
  for (const auto& s : geo.streams) out.push_back({geo.segment(s), w += 0.25});
  return out;
}

template <bool Parallel>
void BM_heat_grid(benchmark::State& state) {
  const auto sources = heat_sources();
  const double res = 1.0 / state.range(0);
  kernels::GridSpec grid{0, 0, res, static_cast<std::size_t>(16 / res) + 1, static_cast<std::size_t>(12 / res) + 1};
  std::vector<double> out(grid.nx * grid.ny);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::parallel::heat_grid(sources, 2.0, grid, out);
    else kernels::serial::heat_grid(sources, 2.0, grid, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_segment_distances(benchmark::State& state) {
  const std::size_t k = state.range(0);
  Rng rng(2);
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < k; ++i) {
    segs.push_back({{rng.uniform() * 50, rng.uniform() * 50}, {rng.uniform() * 50, rng.uniform() * 50}});
  }
  std::vector<double> out(k * k);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::parallel::segment_distances(segs, out);
    else kernels::serial::segment_distances(segs, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <Execution Exec>
void BM_run(benchmark::State& state) {
  const auto bed = office_testbed(1);
  const auto syn = generate_synthetic(bed.synth, bed.geo);
  const auto training = syn.trace.slice(0, bed.train_s);
  const auto test = syn.trace.slice(bed.train_s, bed.synth.duration_s);
  const auto bundle = train_bundle(training, 5, 0.01);
  for (auto _ : state) {
    auto res = run(test, bundle, DetectorConfig{}, Exec);
    benchmark::DoNotOptimize(res.decisions.data());
  }
}

}  // namespace

BENCHMARK(BM_pdf<false>)->Arg(116)->Arg(2048);
BENCHMARK(BM_pdf<true>)->Arg(116)->Arg(2048);
BENCHMARK(BM_cdf<false>)->Arg(116)->Arg(2048);
BENCHMARK(BM_cdf<true>)->Arg(116)->Arg(2048);
BENCHMARK(BM_heat_grid<false>)->Arg(2)->Arg(20);
BENCHMARK(BM_heat_grid<true>)->Arg(2)->Arg(20);
BENCHMARK(BM_segment_distances<false>)->Arg(12)->Arg(400);
BENCHMARK(BM_segment_distances<true>)->Arg(12)->Arg(400);
BENCHMARK(BM_run<Execution::serial>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_run<Execution::parallel>)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
