#include <doctest.h>

#include <cmath>

#include "rasid/error.hpp"
#include "rasid/synth.hpp"
#include "support.hpp"

using namespace rasid;

namespace {

SiteGeometry one_link() {
  SiteGeometry g;
  g.nodes = {{"AP1", {0, 0}}, {"MP1", {10, 0}}};
  g.streams = {StreamId{"AP1", "MP1"}};
  g.v_max = 1.5;
  g.bounds = Rect{-1, -5, 11, 5};
  return g;
}

double sd(const std::vector<double>& xs) {
  double m = 0;
  for (double x : xs) m += x;
  m /= xs.size();
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / (xs.size() - 1));
}

}  // namespace

TEST_CASE("rng is reproducible and well scaled") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
  Rng r(7);
  double s = 0, ss = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.student_t_unit(4);
    s += z;
    ss += z * z;
  }
  CHECK(std::abs(s / n) < 0.02);
  CHECK(ss / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("empty schedule is all silence") {
  SynthConfig cfg;
  cfg.duration_s = 100;
  const auto run = generate_synthetic(cfg, one_link());
  CHECK(run.trace.samples(StreamId{"AP1", "MP1"}).size() == 100);
  CHECK(run.labels.motion_intervals().empty());
  CHECK(run.labels.all_silence(0, 100));
}

TEST_CASE("same seed, same bytes") {
  SynthConfig cfg;
  cfg.duration_s = 300;
  cfg.schedule = {MotionSpan{100, 200, {{2, 1}, {8, 1}}, std::nullopt}};
  test::TempDir dir;
  write_trace(dir / "a.jsonl", generate_synthetic(cfg, one_link()).trace);
  write_trace(dir / "b.jsonl", generate_synthetic(cfg, one_link()).trace);
  CHECK(test::read_file(dir / "a.jsonl") == test::read_file(dir / "b.jsonl"));
  cfg.seed = 2;
  write_trace(dir / "c.jsonl", generate_synthetic(cfg, one_link()).trace);
  CHECK(test::read_file(dir / "a.jsonl") != test::read_file(dir / "c.jsonl"));
}

TEST_CASE("walker on the link triples the spread") {
  SynthConfig cfg;
  cfg.duration_s = 2400;
  cfg.silence = {-55.0, 1.0};
  cfg.motion_std_factor = 3.0;
  // walk back and forth on the line of sight for the second half
  std::vector<Point> path;
  for (int i = 0; i < 200; ++i) path.push_back(i % 2 ? Point{9, 0} : Point{1, 0});
  cfg.schedule = {MotionSpan{1200, 2400, path, std::nullopt}};
  const auto run = generate_synthetic(cfg, one_link());
  std::vector<double> quiet, moving;
  for (const auto& s : run.trace.samples(StreamId{"AP1", "MP1"})) (s.t < 1200 ? quiet : moving).push_back(s.rss);
  REQUIRE(quiet.size() >= 600);
  REQUIRE(moving.size() >= 600);
  CHECK(sd(moving) / sd(quiet) == doctest::Approx(3.0).epsilon(0.15));
}

TEST_CASE("labels mirror the schedule") {
  SynthConfig cfg;
  cfg.duration_s = 100;
  cfg.schedule = {MotionSpan{10, 20, {{5, 0}}, "A"}, MotionSpan{50, 60, {{5, 0}}, std::nullopt}};
  const auto run = generate_synthetic(cfg, one_link());
  const auto m = run.labels.motion_intervals();
  REQUIRE(m.size() == 2);
  CHECK(m[0].start == 10);
  CHECK(m[0].end == 20);
  CHECK(m[0].loc == "A");
  CHECK(run.labels.label_at(0) == Label::silence);
  CHECK(run.labels.label_at(99) == Label::silence);
  CHECK(run.labels.label_at(55) == Label::motion);
}

TEST_CASE("samples tick at the nominal rate inside the duration") {
  SynthConfig cfg;
  cfg.duration_s = 10;
  cfg.rate_hz = 2;
  const auto tr = generate_synthetic(cfg, one_link()).trace;
  const auto s = tr.samples(StreamId{"AP1", "MP1"});
  REQUIRE(s.size() == 20);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i].t == doctest::Approx(i * 0.5));
}

TEST_CASE("mean drift is linear") {
  SynthConfig cfg;
  cfg.duration_s = 7200;
  cfg.silence = {-60, 0.5};
  cfg.drift_per_hour = 3.0;
  const auto run = generate_synthetic(cfg, one_link());
  const auto s = run.trace.samples(StreamId{"AP1", "MP1"});
  double first = 0, last = 0;
  for (int i = 0; i < 600; ++i) first += s[i].rss, last += s[s.size() - 600 + i].rss;
  // window means sit 1/12 h from each end
  CHECK((last - first) / 600 == doctest::Approx(3.0 * (7200 - 600) / 3600).epsilon(0.02));
}

TEST_CASE("config validation") {
  SynthConfig cfg;
  cfg.schedule = {MotionSpan{10, 20, {{50, 50}}, std::nullopt}};
  CHECK_THROWS_AS(generate_synthetic(cfg, one_link()), ConfigError);
  cfg.schedule.clear();
  cfg.motion_std_factor = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.motion_std_factor = 3;
  cfg.schedule = {MotionSpan{10, 20, {{5, 0}}, std::nullopt}, MotionSpan{15, 30, {{5, 0}}, std::nullopt}};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("config json round trip") {
  SynthConfig cfg;
  cfg.seed = 9;
  cfg.duration_s = 123;
  cfg.overrides[StreamId{"AP1", "MP1"}] = {-42, 2};
  cfg.noise = NoiseKind::student_t;
  cfg.schedule = {MotionSpan{10, 20, {{1, 1}, {2, 2}}, "A"}};
  const auto back = synth_config_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(back.silence_for(StreamId{"AP1", "MP1"}).mean == -42);
  CHECK_THROWS_AS(synth_config_from_json(nlohmann::json{{"noise", "pink"}}), ConfigError);
}
