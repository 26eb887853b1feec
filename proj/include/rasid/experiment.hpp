#pragma once

#include <cstdint>
#include <vector>

#include "rasid/baselines.hpp"
#include "rasid/detector.hpp"
#include "rasid/evaluation.hpp"
#include "rasid/profiling.hpp"
#include "rasid/synth.hpp"

namespace rasid {

/// Synthetic stand-in for a physical deployment: a site, a generator
/// configuration, and the length of the silence training prefix.
struct Testbed {
  SiteGeometry geo;
  SynthConfig synth;
  double train_s = 120.0;
};

/// 16 m x 12 m office with four APs and three MPs (12 streams), 75 minutes at
/// 1 Hz, three continuous walks covering 40% of the time after training.
Testbed office_testbed(std::uint64_t seed);

SiteGeometry office_geometry();

/// Waypoints for a walk that repeats `loop` until `duration_s` at `speed`.
std::vector<Point> repeat_loop(const std::vector<Point>& loop, double duration_s, double speed);

/// One profile per stream of `training`.
ProfileBundle train_bundle(const RssTrace& training, std::size_t l, double alpha,
                           FeatureKind kind = FeatureKind::variance);

/// Reports for the three cumulative stages of the pipeline: basic detection
/// with frozen profiles, basic detection with profile updates, and the
/// refined decision.
struct StageReports {
  EvalReport basic;
  EvalReport updated;
  EvalReport refined;
  RunResult run;  // the full pipeline run (updates on)
};

StageReports evaluate_stages(const RssTrace& training, const RssTrace& test, const LabelTrack& truth,
                             const DetectorConfig& cfg);

/// Training trace for the MLE baseline: silence plus stationary activity at
/// tagged spots, from its own seed.
Testbed mle_training_testbed(std::uint64_t seed);

// ---------------------------------------------------------------------------
// sweeps

enum class Stage { basic, updated, refined };

std::string to_string(Stage s);
Stage parse_stage(const std::string& text);

struct SweepGrid {
  std::vector<std::size_t> l{5};
  std::vector<double> alpha{0.01};
  std::vector<std::size_t> l_update{15};
  Stage stage = Stage::basic;
};

struct SweepPoint {
  std::size_t l = 0;
  double alpha = 0.0;
  std::size_t l_update = 0;
  EvalReport report;
};

/// Every (l, alpha, l_update) combination, in that nesting order. Grid points
/// run concurrently; the output order does not depend on scheduling.
std::vector<SweepPoint> sweep(const RssTrace& training, const RssTrace& test, const LabelTrack& truth,
                              const DetectorConfig& base, const SweepGrid& grid);

nlohmann::json to_json(const SweepPoint& p);

// ---------------------------------------------------------------------------
// head-to-head comparison

struct SuiteInputs {
  const RssTrace* training = nullptr;  // silence prefix
  const RssTrace* test = nullptr;
  const LabelTrack* truth = nullptr;
  const MleModel* mle = nullptr;       // optional
  DetectorConfig detector;
  BaselineParams baselines;
};

/// RASID (refined) against moving average, moving variance, the parametric
/// model and, when a model is given, MLE.
std::vector<NamedReport> baseline_suite(const SuiteInputs& in);

}  // namespace rasid
