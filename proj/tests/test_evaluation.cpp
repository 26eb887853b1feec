#include <doctest.h>

#include "rasid/error.hpp"
#include "rasid/evaluation.hpp"

using namespace rasid;

namespace {

AlarmSeries series(std::size_t n, auto&& pred) {
  AlarmSeries s;
  for (std::size_t i = 0; i < n; ++i) {
    s.t.push_back(double(i));
    s.alarm.push_back(pred(i));
  }
  return s;
}

LabelTrack half_motion(double n) {
  return LabelTrack({{0, n / 2, Label::silence, std::nullopt}, {n / 2, n, Label::motion, std::nullopt}});
}

}  // namespace

TEST_CASE("rates from counts") {
  const auto r = report_from_counts({90, 10, 890, 10});
  CHECK(r.precision == doctest::Approx(0.9));
  CHECK(r.recall == doctest::Approx(0.9));
  CHECK(r.f_measure == doctest::Approx(0.9));
  CHECK(r.fp_rate == doctest::Approx(10.0 / 900));
  CHECK(r.fn_rate == doctest::Approx(0.1));
  const auto empty = report_from_counts({});
  CHECK(empty.f_measure == 0);
  CHECK(empty.precision == 0);
  for (const ConfusionCounts c : {ConfusionCounts{3, 7, 5, 1}, ConfusionCounts{50, 2, 1, 40}, ConfusionCounts{1, 0, 0, 9}}) {
    const auto x = report_from_counts(c);
    CHECK(x.f_measure <= (x.precision + x.recall) / 2 + 1e-12);
  }
}

TEST_CASE("scoring alarm series") {
  const auto truth = half_motion(100);
  SUBCASE("perfect") {
    const auto r = score(series(100, [](std::size_t i) { return i >= 50; }), truth);
    CHECK(r.f_measure == 1);
    CHECK(r.fp_rate == 0);
    CHECK(r.latency.p90 == 0.0);
    CHECK(r.latency.detected == 1);
  }
  SUBCASE("always on") {
    const auto r = score(series(100, [](std::size_t) { return true; }), truth);
    CHECK(r.precision == doctest::Approx(0.5));
    CHECK(r.recall == 1);
    CHECK(r.f_measure == doctest::Approx(2.0 / 3));
  }
  SUBCASE("late by three seconds") {
    const auto r = score(series(100, [](std::size_t i) { return i >= 53; }), truth);
    CHECK(r.latency.latencies == std::vector<double>{3.0});
    CHECK(r.counts.fn == 3);
  }
  SUBCASE("missed interval") {
    const auto r = score(series(100, [](std::size_t) { return false; }), truth);
    CHECK(r.latency.missed == 1);
    CHECK_FALSE(r.latency.p90.has_value());
    CHECK(r.recall == 0);
  }
  SUBCASE("silence only") {
    const LabelTrack quiet({{0, 100, Label::silence, std::nullopt}});
    const auto r = score(series(100, [](std::size_t i) { return i % 4 == 0; }), quiet);
    CHECK(r.fp_rate == doctest::Approx(0.25));
    CHECK(r.latency.detected + r.latency.missed == 0);
  }
  SUBCASE("uncovered tick") {
    CHECK_THROWS_AS(score(series(101, [](std::size_t) { return false; }), truth), DataError);
  }
}

TEST_CASE("latency percentile is nearest rank") {
  std::vector<LabelInterval> iv;
  std::vector<double> delays{0, 1, 2, 3, 4, 5, 6, 7, 8, 20};
  for (std::size_t k = 0; k < delays.size(); ++k) {
    iv.push_back({k * 100.0, k * 100.0 + 50, Label::silence, std::nullopt});
    iv.push_back({k * 100.0 + 50, k * 100.0 + 100, Label::motion, std::nullopt});
  }
  const LabelTrack truth(iv);
  const auto s = series(1000, [&](std::size_t i) {
    const auto k = i / 100, off = i % 100;
    return off >= 50 + delays[k];
  });
  const auto l = latency(s, truth);
  CHECK(l.detected == 10);
  CHECK(*l.p90 == 8.0);
}

TEST_CASE("decision adapters") {
  std::vector<GlobalDecision> d{{0, 1, 1, true, false}, {1, 2, 2, false, true}};
  CHECK(refined_alarms(d).alarm == std::vector<bool>{false, true});
  CHECK(basic_alarms(d).alarm == std::vector<bool>{true, false});
}

TEST_CASE("comparison table") {
  NamedReport a{"RASID", report_from_counts({90, 10, 890, 10}), {{"l", 5}}};
  NamedReport b{"moving_average", report_from_counts({50, 100, 800, 50}), {}};
  const std::vector<NamedReport> two{a, b};
  const auto doc = compare(two);
  CHECK(doc["columns"][0] == "detector");
  CHECK(doc["rows"].size() == 2);
  CHECK(doc["rows"][0][0] == "RASID");
  CHECK(doc["parameters"]["RASID"]["l"] == 5);
  const auto text = format_comparison(two);
  CHECK(text.find("0.9000") != std::string::npos);

  CHECK_THROWS_AS(compare(std::vector<NamedReport>{a}), ConfigError);
  CHECK_THROWS_AS(compare(std::vector<NamedReport>{a, a}), ConfigError);
  NamedReport blank = b;
  blank.detector = "";
  CHECK_THROWS_AS(compare(std::vector<NamedReport>{a, blank}), ConfigError);

  CHECK(format_report(a.report).find("F-measure") != std::string::npos);
  CHECK(to_json(a.report)["f_measure"] == doctest::Approx(0.9));
}
