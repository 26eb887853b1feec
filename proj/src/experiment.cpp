#include "rasid/experiment.hpp"

#include <cmath>
#include <exception>

#include "rasid/error.hpp"

namespace rasid {

SiteGeometry office_geometry() {
  SiteGeometry geo;
  geo.nodes = {{"AP1", {0.0, 0.0}},  {"AP2", {16.0, 0.0}}, {"AP3", {16.0, 12.0}},
               {"AP4", {0.0, 12.0}}, {"MP1", {5.0, 6.0}},  {"MP2", {11.0, 6.0}},
               {"MP3", {8.0, 12.0}}};
  for (const char* ap : {"AP1", "AP2", "AP3", "AP4"}) {
    for (const char* mp : {"MP1", "MP2", "MP3"}) geo.streams.push_back(StreamId{ap, mp});
  }
  geo.v_max = 1.5;
  geo.bounds = Rect{0.0, 0.0, 16.0, 12.0};
  return geo;
}

std::vector<Point> repeat_loop(const std::vector<Point>& loop, double duration_s, double speed) {
  if (loop.size() < 2) throw ConfigError("walk loop needs at least two waypoints");
  std::vector<Point> path{loop.front()};
  double length = 0.0;
  const double target = duration_s * speed;
  for (std::size_t i = 1; length < target; i = i % (loop.size() - 1) + 1) {
    length += distance(path.back(), loop[i]);
    path.push_back(loop[i]);
  }
  return path;
}

Testbed office_testbed(std::uint64_t seed) {
  Testbed tb;
  tb.geo = office_geometry();
  auto& s = tb.synth;
  s.seed = seed;
  s.duration_s = 4500.0;
  s.rate_hz = 1.0;
  s.motion_std_factor = 10.0;
  s.influence_radius_m = 2.5;
  s.std_drift_per_hour = 0.15;
  // per-stream silence levels: path-loss-like means, mixed noise levels
  const double stds[] = {1.0, 1.4, 0.8, 1.2, 1.6, 1.0, 0.9, 1.3, 1.1, 1.5, 1.0, 1.2};
  for (std::size_t j = 0; j < tb.geo.streams.size(); ++j) {
    const auto seg = tb.geo.segment(tb.geo.streams[j]);
    const double d = distance(seg.a, seg.b);
    s.overrides[tb.geo.streams[j]] = StreamSilence{-40.0 - 20.0 * std::log10(std::max(d, 1.0)), stds[j]};
  }
  // perimeter walk inset 2 m, and a figure-eight through the middle
  const std::vector<Point> ring{{2, 2}, {14, 2}, {14, 10}, {2, 10}, {2, 2}};
  const std::vector<Point> eight{{2, 2}, {14, 10}, {14, 2}, {2, 10}, {2, 2}};
  const double speed = 0.8;
  s.schedule = {
      MotionSpan{600.0, 1200.0, repeat_loop(ring, 600.0, speed), std::nullopt},
      MotionSpan{1800.0, 2400.0, repeat_loop(eight, 600.0, speed), std::nullopt},
      MotionSpan{3300.0, 3850.0, repeat_loop(ring, 550.0, speed), std::nullopt},
  };
  return tb;
}

ProfileBundle train_bundle(const RssTrace& training, std::size_t l, double alpha, FeatureKind kind) {
  ProfileBundle bundle;
  for (const auto& s : training.streams()) bundle.push_back(build_profile(training, s, l, alpha, kind));
  return bundle;
}

StageReports evaluate_stages(const RssTrace& training, const RssTrace& test, const LabelTrack& truth,
                             const DetectorConfig& cfg) {
  const auto bundle = train_bundle(training, cfg.l, cfg.alpha, cfg.feature);
  auto frozen = cfg;
  frozen.update = false;
  const auto basic_run = run(test, bundle, frozen);
  auto updating = cfg;
  updating.update = true;
  StageReports out;
  out.run = run(test, bundle, updating);
  out.basic = score(basic_alarms(basic_run.decisions), truth);
  out.updated = score(basic_alarms(out.run.decisions), truth);
  out.refined = score(refined_alarms(out.run.decisions), truth);
  return out;
}

Testbed mle_training_testbed(std::uint64_t seed) {
  Testbed tb = office_testbed(seed);
  auto& s = tb.synth;
  s.duration_s = 1200.0;
  s.drift_per_hour = 0.0;
  s.std_drift_per_hour = 0.0;
  s.schedule.clear();
  // a small square walked in place at each spot
  const std::pair<const char*, Point> spots[] = {
      {"A", {4.0, 3.0}}, {"B", {12.0, 3.0}}, {"C", {12.0, 9.0}}, {"D", {4.0, 9.0}}};
  double t = 300.0;
  for (const auto& [name, c] : spots) {
    const std::vector<Point> square{{c.x - 1, c.y - 1}, {c.x + 1, c.y - 1}, {c.x + 1, c.y + 1},
                                    {c.x - 1, c.y + 1}, {c.x - 1, c.y - 1}};
    s.schedule.push_back(MotionSpan{t, t + 200.0, repeat_loop(square, 200.0, 0.5), std::string(name)});
    t += 200.0;
  }
  tb.train_s = 300.0;
  return tb;
}

// ---------------------------------------------------------------------------

std::string to_string(Stage s) {
  switch (s) {
    case Stage::basic: return "basic";
    case Stage::updated: return "updated";
    case Stage::refined: return "refined";
  }
  return "refined";
}

Stage parse_stage(const std::string& text) {
  if (text == "basic") return Stage::basic;
  if (text == "updated") return Stage::updated;
  if (text == "refined") return Stage::refined;
  throw ConfigError("unknown stage '" + text + "' (basic, updated, refined)");
}

std::vector<SweepPoint> sweep(const RssTrace& training, const RssTrace& test, const LabelTrack& truth,
                              const DetectorConfig& base, const SweepGrid& grid) {
  if (grid.l.empty() || grid.alpha.empty() || grid.l_update.empty()) throw ConfigError("sweep: empty grid axis");
  std::vector<SweepPoint> points;
  for (auto l : grid.l) {
    for (auto a : grid.alpha) {
      for (auto lu : grid.l_update) points.push_back(SweepPoint{l, a, lu, {}});
    }
  }
  for (const auto& p : points) {
    DetectorConfig cfg = base;
    cfg.l = p.l;
    cfg.alpha = p.alpha;
    cfg.l_update = p.l_update;
    cfg.validate();
  }

  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      auto& p = points[static_cast<std::size_t>(i)];
      DetectorConfig cfg = base;
      cfg.l = p.l;
      cfg.alpha = p.alpha;
      cfg.l_update = p.l_update;
      cfg.update = grid.stage != Stage::basic;
      const auto bundle = train_bundle(training, p.l, p.alpha, cfg.feature);
      const auto result = run(test, bundle, cfg, Execution::serial);
      p.report = grid.stage == Stage::refined ? score(refined_alarms(result.decisions), truth)
                                              : score(basic_alarms(result.decisions), truth);
    } catch (...) {
#pragma omp critical(rasid_sweep_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return points;
}

nlohmann::json to_json(const SweepPoint& p) {
  return {{"l", p.l}, {"alpha", p.alpha}, {"l_update", p.l_update}, {"report", to_json(p.report)}};
}

// ---------------------------------------------------------------------------

std::vector<NamedReport> baseline_suite(const SuiteInputs& in) {
  if (!in.training || !in.test || !in.truth) throw ConfigError("baseline suite: missing input");
  const auto& training = *in.training;
  const auto& test = *in.test;
  const auto& truth = *in.truth;
  const auto& d = in.detector;
  std::vector<NamedReport> out;

  const auto result = run(test, train_bundle(training, d.l, d.alpha, d.feature), d);
  out.push_back({"RASID", score(refined_alarms(result.decisions), truth),
                 {{"l", d.l}, {"alpha", d.alpha}, {"l_update", d.l_update}, {"beta", d.refine.beta},
                  {"rel_threshold", d.refine.rel_threshold}}});

  const double target = in.baselines.target_false_alarm;
  const auto ma = calibrate_moving_average(training, in.baselines.moving_average, target);
  out.push_back({"moving_average", score(run_moving_average(test, ma, d.rate_hz), truth),
                 {{"short_len", in.baselines.moving_average.short_len},
                  {"long_len", in.baselines.moving_average.long_len},
                  {"target_false_alarm", target}}});

  const auto mv = calibrate_moving_variance(training, in.baselines.moving_variance, target);
  out.push_back({"moving_variance", score(run_moving_variance(test, mv, d.rate_hz), truth),
                 {{"window_len", in.baselines.moving_variance.window_len}, {"target_false_alarm", target}}});

  if (in.mle) {
    out.push_back({"MLE", score(run_mle(test, *in.mle, d.rate_hz), truth),
                   {{"profiles", in.mle->profile_names().size()}}});
  }

  out.push_back({"parametric", score(run_parametric(test, training, d.l, d.alpha, d.rate_hz), truth),
                 {{"l", d.l}, {"alpha", d.alpha}}});
  return out;
}

}  // namespace rasid
