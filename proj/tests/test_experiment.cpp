#include <doctest.h>

#include "rasid/error.hpp"
#include "rasid/experiment.hpp"

using namespace rasid;

TEST_CASE("office testbed") {
  const auto bed = office_testbed(1);
  CHECK(bed.geo.streams.size() == 12);
  CHECK_NOTHROW(bed.geo.validate());
  CHECK_NOTHROW(bed.synth.validate());
  const auto syn = generate_synthetic(bed.synth, bed.geo);
  std::size_t total = 0;
  for (const auto& s : syn.trace.streams()) total += syn.trace.samples(s).size();
  CHECK(total == 12 * 4500);
  CHECK(syn.labels.all_silence(0, bed.train_s));
  CHECK(syn.labels.motion_intervals().size() == 3);
}

TEST_CASE("repeat_loop") {
  const std::vector<Point> square{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  const auto path = repeat_loop(square, 40, 1.0);
  double len = 0;
  for (std::size_t i = 1; i < path.size(); ++i) len += distance(path[i - 1], path[i]);
  CHECK(len >= 40);
}

TEST_CASE("sweep") {
  auto bed = office_testbed(2);
  bed.synth.duration_s = 900;
  bed.synth.schedule = {MotionSpan{400, 600, repeat_loop({{3, 3}, {13, 3}, {13, 9}, {3, 9}}, 200, 0.8), std::nullopt}};
  const auto syn = generate_synthetic(bed.synth, bed.geo);
  const auto training = syn.trace.slice(0, bed.train_s);
  const auto test = syn.trace.slice(bed.train_s, 900);
  SweepGrid grid;
  grid.l = {5, 10};
  grid.alpha = {0.01, 0.05};
  grid.stage = Stage::refined;
  const auto a = sweep(training, test, syn.labels, DetectorConfig{}, grid);
  const auto b = sweep(training, test, syn.labels, DetectorConfig{}, grid);
  REQUIRE(a.size() == 4);
  CHECK(a[0].l == 5);
  CHECK(a[0].alpha == 0.01);
  CHECK(a[1].alpha == 0.05);
  CHECK(a[2].l == 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(to_json(a[i]) == to_json(b[i]));
  }
  CHECK(parse_stage("updated") == Stage::updated);
  CHECK_THROWS_AS(parse_stage("final"), ConfigError);
}

TEST_CASE("refinement cuts false alarms on the testbed") {
  const auto bed = office_testbed(1);
  const auto syn = generate_synthetic(bed.synth, bed.geo);
  const auto st = evaluate_stages(syn.trace.slice(0, bed.train_s), syn.trace.slice(bed.train_s, bed.synth.duration_s),
                                  syn.labels, DetectorConfig{});
  CHECK(st.refined.fp_rate < st.basic.fp_rate);
  CHECK(st.refined.fp_rate < st.updated.fp_rate);
  // every alarm episode contains an anomalous stream
  bool open = false, seen = false;
  for (std::size_t i = 0; i < st.run.decisions.size(); ++i) {
    const auto& d = st.run.decisions[i];
    if (d.refined_alarm && !open) open = true, seen = false;
    if (open) seen = seen || d.basic_alarm;
    if (!d.refined_alarm && open) {
      CHECK(seen);
      open = false;
    }
  }
}
