#include <doctest.h>

#include <cmath>
#include <numeric>

#include "rasid/baselines.hpp"
#include "rasid/error.hpp"
#include "rasid/random.hpp"

using namespace rasid;

namespace {

// chi-square cdf by composite Simpson on the density
double chi2_cdf_quadrature(double k, double x) {
  const int n = 20000;
  const double lo = 1e-12, h = (x - lo) / n;
  auto pdf = [k](double t) {
    return std::exp((k / 2 - 1) * std::log(t) - t / 2 - (k / 2) * std::log(2.0) - std::lgamma(k / 2));
  };
  double s = pdf(lo) + pdf(x);
  for (int i = 1; i < n; ++i) s += pdf(lo + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

const StreamId A{"AP1", "MP1"}, B{"AP2", "MP1"};

}  // namespace

TEST_CASE("moving average") {
  const MovingAverageCfg cfg{5, 60, 1.0};
  std::vector<double> flat(80, -50.0);
  CHECK_FALSE(moving_average_step(cfg, flat));
  auto step = flat;
  for (std::size_t i = 75; i < 80; ++i) step[i] = -40;
  CHECK(moving_average_step(cfg, step));
  auto shifted = step;
  for (auto& v : shifted) v += 17.0;
  CHECK(moving_average_step(cfg, shifted) == moving_average_step(cfg, step));
  CHECK_THROWS_AS(moving_average_step(cfg, std::vector<double>(59, 0.0)), DataError);
  CHECK_THROWS_AS((MovingAverageCfg{5, 5, 1.0}.validate()), ConfigError);
}

TEST_CASE("moving variance") {
  const MovingVarianceCfg cfg{5, 1.0, 3.0};
  CHECK_FALSE(moving_variance_step(cfg, std::vector<double>(5, -50.0)));
  Rng rng(9);
  int alarms = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    std::vector<double> w;
    for (int k = 0; k < 5; ++k) w.push_back(rng.normal(-50, 1.0));
    alarms += moving_variance_step(cfg, w);
  }
  // P(chi2_4 > 16) = 0.003
  CHECK(double(alarms) / n < 0.01);
  int loud = 0;
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> w;
    for (int k = 0; k < 5; ++k) w.push_back(rng.normal(-50, std::sqrt(10.0)));
    loud += moving_variance_step(cfg, w);
  }
  CHECK(double(loud) / 2000 > 0.5);
  CHECK_THROWS_AS((MovingVarianceCfg{1, 1, 1}.validate()), ConfigError);
}

TEST_CASE("MLE classification") {
  constexpr std::size_t bins = MleModel::kHighDbm - MleModel::kLowDbm + 1;
  auto counts_at = [](int dbm, double c) {
    std::vector<double> h(bins, 0.0);
    h[dbm - MleModel::kLowDbm] = c;
    return h;
  };
  const auto model = MleModel::from_counts({"silence", "desk"}, {A, B},
                                           {{counts_at(-50, 100), counts_at(-60, 100)},
                                            {counts_at(-55, 100), counts_at(-65, 100)}});
  CHECK(mle_classify(model, std::vector<double>{-50, -60}).profile == 0);
  CHECK_FALSE(mle_classify(model, std::vector<double>{-50, -60}).alarm);
  CHECK(mle_classify(model, std::vector<double>{-55.3, -64.8}).profile == 1);
  CHECK(mle_classify(model, std::vector<double>{-55, -65}).alarm);
  // one stream each way: equal likelihoods go to silence
  CHECK(mle_classify(model, std::vector<double>{-50, -65}).profile == 0);
  CHECK(mle_classify(model, std::vector<double>{-90, -90}).profile == 0);
  CHECK_THROWS_AS(mle_classify(model, std::vector<double>{-50}), DataError);
  // smoothed probabilities
  CHECK(std::exp(model.log_likelihood(0, 0, -50)) == doctest::Approx(101.0 / (100 + bins)));
  CHECK(std::exp(model.log_likelihood(0, 0, -51)) == doctest::Approx(1.0 / (100 + bins)));
  CHECK_THROWS_AS(MleModel::from_counts({"desk"}, {A}, {{counts_at(-50, 1)}}), DataError);
}

TEST_CASE("MLE training from labels") {
  RssTrace tr;
  for (int i = 0; i < 30; ++i) tr.add(A, i, i < 10 ? -50 : (i < 20 ? -58 : -62));
  const LabelTrack labels({{0, 10, Label::silence, std::nullopt},
                           {10, 20, Label::motion, std::string("a")},
                           {20, 30, Label::motion, std::nullopt}});
  const auto m = MleModel::train(tr, labels);
  REQUIRE(m.profile_names() == std::vector<std::string>{"silence", "a", "motion"});
  CHECK(mle_classify(m, std::vector<double>{-58}).profile == 1);
  CHECK(mle_classify(m, std::vector<double>{-62}).profile == 2);
  CHECK(mle_classify(m, std::vector<double>{-50}).profile == 0);
}

TEST_CASE("chi-square bound") {
  CHECK(chi_square_bound({1.0, 5, 0.01}) == doctest::Approx(3.3192).epsilon(1e-4));
  for (double k : {2.0, 4.0, 9.0, 29.0}) {
    for (double p : {0.5, 0.9, 0.99}) {
      const double q = chi_square_quantile(k, p);
      CAPTURE(k);
      CAPTURE(p);
      CHECK(chi2_cdf_quadrature(k, q) == doctest::Approx(p).epsilon(1e-6));
    }
  }
  // df = 4 closed form
  const double q4 = chi_square_quantile(4, 0.99);
  CHECK(1 - std::exp(-q4 / 2) * (1 + q4 / 2) == doctest::Approx(0.99).epsilon(1e-10));

  double prev = INFINITY;
  for (std::size_t l = 3; l <= 30; ++l) {
    const double b = chi_square_bound({1.0, l, 0.01});
    CHECK(b < prev);
    prev = b;
  }
  CHECK(chi_square_bound({1.0, 5, 0.001}) > chi_square_bound({1.0, 5, 0.01}));
  CHECK(chi_square_bound({2.5, 5, 0.01}) == doctest::Approx(2.5 * chi_square_bound({1.0, 5, 0.01})));
  CHECK_THROWS_AS(chi_square_bound({1.0, 1, 0.01}), ConfigError);
  CHECK_THROWS_AS(chi_square_bound({0.0, 5, 0.01}), ConfigError);
}

TEST_CASE("calibration on training silence") {
  Rng rng(41);
  RssTrace train, held;
  for (int i = 0; i < 4000; ++i) {
    train.add(A, i, rng.normal(-50, 1.0));
    train.add(B, i, rng.normal(-60, 2.0));
    held.add(A, i, rng.normal(-50, 1.0));
    held.add(B, i, rng.normal(-60, 2.0));
  }
  const auto mv = calibrate_moving_variance(train, MovingVarianceCfg{}, 0.01);
  REQUIRE(mv.size() == 2);
  CHECK(mv.at(A).silence_variance == doctest::Approx(1.0).epsilon(0.1));
  CHECK(mv.at(B).silence_variance == doctest::Approx(4.0).epsilon(0.1));
  const auto ma = calibrate_moving_average(train, MovingAverageCfg{}, 0.01);
  CHECK(ma.at(B).threshold > ma.at(A).threshold);

  // per-stream rate near target on fresh silence, so either-stream rate near 2%
  const auto mva = run_moving_variance(held, mv);
  const auto fa = std::count(mva.alarm.begin(), mva.alarm.end(), true);
  CHECK(double(fa) / mva.alarm.size() < 0.035);
  const auto maa = run_moving_average(held, ma);
  CHECK(double(std::count(maa.alarm.begin(), maa.alarm.end(), true)) / maa.alarm.size() < 0.035);
  CHECK_FALSE(maa.alarm[30]);  // not enough history yet

  std::map<StreamId, MovingVarianceCfg> partial{{A, mv.at(A)}};
  CHECK_THROWS_AS(run_moving_variance(held, partial), DataError);
}

TEST_CASE("parametric runner") {
  Rng rng(5);
  RssTrace train, test;
  for (int i = 0; i < 1000; ++i) train.add(A, i, rng.normal(-50, 1.0));
  for (int i = 0; i < 200; ++i) test.add(A, i, i < 100 ? -50.0 : -50.0 + (i % 2 ? 6 : -6));
  const auto out = run_parametric(test, train, 5, 0.01);
  CHECK_FALSE(out.alarm[50]);
  CHECK(out.alarm[150]);
  CHECK_FALSE(out.alarm[2]);
}

TEST_CASE("baseline parameters") {
  const auto p = baseline_params_from_json(nlohmann::json::parse(R"({"moving_average":{"short_len":4}})"));
  CHECK(p.moving_average.short_len == 4);
  CHECK(p.moving_average.long_len == 60);
  CHECK(baseline_params_from_json(to_json(p)).moving_average.short_len == 4);
  CHECK_THROWS_AS(baseline_params_from_json(nlohmann::json::parse(R"({"target_false_alarm":2})")), ConfigError);
  CHECK_THROWS_AS(baseline_params_from_json(nlohmann::json::parse(R"({"moving_variance":{"window_len":"x"}})")),
                  ConfigError);
}
