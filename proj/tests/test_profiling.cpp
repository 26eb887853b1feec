#include <doctest.h>

#include <cmath>
#include <numeric>

#include "rasid/error.hpp"
#include "rasid/profiling.hpp"
#include "rasid/random.hpp"
#include "rasid/synth.hpp"
#include "support.hpp"

using namespace rasid;

namespace {

const StreamId S{"AP1", "MP1"};

RssTrace gaussian_trace(std::uint64_t seed, std::size_t n, double sd = 1.0) {
  Rng rng(seed);
  RssTrace tr;
  for (std::size_t i = 0; i < n; ++i) tr.add(S, static_cast<double>(i), rng.normal(-50, sd));
  return tr;
}

std::vector<ScoredFeature> group_of(double x, double score, std::size_t n = 15) {
  return std::vector<ScoredFeature>(n, ScoredFeature{x, score});
}

}  // namespace

TEST_CASE("window features") {
  const std::vector<double> w{1, 2, 3, 4, 5};
  CHECK(feature(w, FeatureKind::variance) == 2.5);
  CHECK(feature(w, FeatureKind::mean) == 3);
  CHECK(feature(w, FeatureKind::std_dev) == doctest::Approx(std::sqrt(2.5)));
  CHECK(feature(std::vector<double>(5, -42.0), FeatureKind::variance) == 0);
  CHECK_THROWS_AS(feature(std::vector<double>{1}, FeatureKind::variance), DataError);
  CHECK(feature(std::vector<double>{1}, FeatureKind::mean) == 1);
  CHECK(parse_feature_kind("std_dev") == FeatureKind::std_dev);
  CHECK_THROWS_AS(parse_feature_kind("median"), ConfigError);
}

TEST_CASE("histogram distance") {
  const std::vector<double> a{1, 2, 2, 3};
  CHECK(histogram_distance(a, a) == 0);
  CHECK(histogram_distance(std::vector<double>{0}, std::vector<double>{1}, 2) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(histogram_distance(a, a, 0), DataError);
}

TEST_CASE("dispersion separates silence from motion better than the mean") {
  SiteGeometry geo;
  geo.nodes = {{"AP1", {0, 0}}, {"MP1", {10, 0}}};
  geo.streams = {S};
  geo.bounds = Rect{0, -1, 10, 1};
  SynthConfig cfg;
  cfg.duration_s = 2400;
  std::vector<Point> path;
  for (int i = 0; i < 200; ++i) path.push_back(i % 2 ? Point{9, 0} : Point{1, 0});
  cfg.schedule = {MotionSpan{1200, 2400, path, std::nullopt}};
  const auto run = generate_synthetic(cfg, geo);
  std::vector<double> silence, motion;
  for (const auto& s : run.trace.samples(S)) (s.t < 1200 ? silence : motion).push_back(s.rss);
  std::vector<std::size_t> lengths;
  for (std::size_t l = 5; l <= 30; ++l) lengths.push_back(l);
  for (const auto& row : feature_study(silence, motion, lengths)) {
    CAPTURE(row.l);
    CHECK(row.std_distance > row.mean_distance);
  }
}

TEST_CASE("linear weights") {
  const auto w = linear_weights(3);
  CHECK(w[0] == doctest::Approx(1.0 / 6));
  CHECK(w[1] == doctest::Approx(1.0 / 3));
  CHECK(w[2] == doctest::Approx(0.5));
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == 1.0);
  const auto big = linear_weights(116);
  CHECK(std::accumulate(big.begin(), big.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("build_profile") {
  SUBCASE("120 samples give 116 points and the 99th percentile") {
    const auto p = build_profile(gaussian_trace(1, 120), S, 5, 0.01);
    CHECK(p.model.size() == 116);
    CHECK(p.capacity == 116);
    CHECK(p.window == 5);
    CHECK(p.upper == p.model.quantile(0.99));
    CHECK_FALSE(p.lower.has_value());
  }
  SUBCASE("constant stream") {
    RssTrace tr;
    for (int i = 0; i < 120; ++i) tr.add(S, i, -50);
    const auto p = build_profile(tr, S, 5, 0.01);
    for (double x : p.model.points()) CHECK(x == 0);
    CHECK(p.upper > 0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_profile(gaussian_trace(1, 5), S, 5, 0.01), DataError);
    CHECK_NOTHROW(build_profile(gaussian_trace(1, 6), S, 5, 0.01));
    CHECK_THROWS_AS(build_profile(gaussian_trace(1, 120), S, 5, 0.0), ConfigError);
    CHECK_THROWS_AS(build_profile(gaussian_trace(1, 120), S, 5, 1.0), ConfigError);
  }
  SUBCASE("mean feature keeps two bounds") {
    const auto p = build_profile(gaussian_trace(2, 120), S, 5, 0.01, FeatureKind::mean);
    REQUIRE(p.lower.has_value());
    CHECK(*p.lower < p.center);
    CHECK(p.center < p.upper);
    CHECK(p.score(p.center) == 0);
    CHECK(p.score(p.upper) == doctest::Approx(1));
    CHECK(p.score(*p.lower) == doctest::Approx(1));
  }
}

TEST_CASE("held-out silence exceeds the bound at rate alpha") {
  // a long training record pins the quantile; held-out windows do not overlap
  const auto p = build_profile(gaussian_trace(31, 20000), S, 5, 0.01);
  const auto held = gaussian_trace(32, 50000);
  const auto s = held.samples(S);
  std::size_t over = 0, total = 0;
  for (std::size_t i = 0; i + 5 <= s.size(); i += 5, ++total) {
    std::vector<double> w;
    for (std::size_t k = i; k < i + 5; ++k) w.push_back(s[k].rss);
    over += p.anomalous(feature(w, FeatureKind::variance));
  }
  REQUIRE(total == 10000);
  CHECK(std::abs(double(over) / total - 0.01) <= 0.005);
}

TEST_CASE("maybe_update") {
  const auto p = build_profile(gaussian_trace(4, 120), S, 5, 0.01);
  const UpdatePolicy pol{15};
  SUBCASE("high scores leave the profile alone") {
    const auto g = group_of(10.0, 1.5);
    const auto q = maybe_update(p, g, pol);
    CHECK(q.updates == 0);
    CHECK(std::equal(q.model.points().begin(), q.model.points().end(), p.model.points().begin()));
  }
  SUBCASE("mean score exactly one is rejected") {
    CHECK(maybe_update(p, group_of(1.0, 1.0), pol).updates == 0);
  }
  SUBCASE("low scores are admitted") {
    const auto g = group_of(0.7, 0.5);
    const auto q = maybe_update(p, g, pol);
    CHECK(q.updates == 1);
    CHECK(q.model.size() == p.model.size());
    const auto w = q.model.weights();
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.back() > w.front());
    // newest points at the end, oldest evicted first
    CHECK(q.model.points().back() == 0.7);
    CHECK(q.model.points()[0] == p.model.points()[15]);
    CHECK(q.upper == q.model.quantile(0.99));
    CHECK(q.upper != p.upper);
  }
  SUBCASE("admitting small points lowers the bound") {
    const double smallest = *std::min_element(p.model.points().begin(), p.model.points().end());
    auto q = p;
    for (int i = 0; i < 8; ++i) {
      const auto before = q.upper;
      q = maybe_update(q, group_of(smallest * 0.5, 0.1), pol);
      CHECK(q.upper < before);
    }
  }
  SUBCASE("buffer length never changes") {
    auto q = p;
    for (int i = 0; i < 20; ++i) q = maybe_update(q, group_of(0.5 + i, 0.2), pol);
    CHECK(q.model.size() == 116);
  }
  SUBCASE("group size must match") {
    CHECK_THROWS_AS(maybe_update(p, group_of(1, 0.1, 14), pol), DataError);
  }
}

TEST_CASE("bundle persistence") {
  test::TempDir dir;
  ProfileBundle b;
  b.push_back(build_profile(gaussian_trace(5, 120), S, 5, 0.01));
  b.push_back(build_profile(gaussian_trace(6, 120), S, 5, 0.01, FeatureKind::mean));
  b[1].stream = StreamId{"AP2", "MP1"};
  save_bundle(dir / "a.json", b);
  const auto back = load_bundle(dir / "a.json");
  REQUIRE(back.size() == 2);
  CHECK(back[0].upper == b[0].upper);
  CHECK(back[0].model.bandwidth() == b[0].model.bandwidth());
  CHECK(back[1].lower == b[1].lower);
  CHECK(find_profile(back, StreamId{"AP2", "MP1"}) != nullptr);
  CHECK(find_profile(back, StreamId{"AP9", "MP1"}) == nullptr);
  save_bundle(dir / "b.json", back);
  CHECK(test::read_file(dir / "a.json") == test::read_file(dir / "b.json"));

  const auto doc = nlohmann::json::parse(test::read_file(dir / "a.json"));
  const auto& first = doc["profiles"][0];
  for (const char* key : {"stream", "feature", "alpha", "u", "kde", "n"}) CHECK(first.contains(key));

  test::write_file(dir / "bad.json", R"({"profiles":[{"stream":"AP1-MP1"}]})");
  CHECK_THROWS_AS(load_bundle(dir / "bad.json"), DataError);
}
