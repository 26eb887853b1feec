#include "rasid/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "rasid/error.hpp"
#include "rasid/profiling.hpp"

namespace rasid {

using nlohmann::json;

namespace {

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) { return feature(xs, FeatureKind::variance); }

/// Smallest value v with at least a (1 - target) share of xs at or below it.
double upper_quantile(std::vector<double> xs, double target) {
  std::sort(xs.begin(), xs.end());
  const double rank = std::ceil((1.0 - target) * static_cast<double>(xs.size()));
  const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(xs.size()))) - 1;
  return xs[idx];
}

bool window_valid(const TickGrid& grid, std::size_t j, std::size_t end, std::size_t len) {
  if (end + 1 < len) return false;
  for (std::size_t i = end + 1 - len; i <= end; ++i) {
    if (grid.flags[j][i] == TickGrid::Flag::invalid) return false;
  }
  return true;
}

std::vector<double> stream_values(const RssTrace& trace, const StreamId& s) {
  std::vector<double> out;
  for (const auto& sample : trace.samples(s)) out.push_back(sample.rss);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

void MovingAverageCfg::validate() const {
  if (short_len < 2 || short_len >= long_len) throw ConfigError("moving average: need 2 <= short_len < long_len");
  if (!(threshold > 0.0)) throw ConfigError("moving average: threshold must be > 0");
}

bool moving_average_step(const MovingAverageCfg& cfg, std::span<const double> history) {
  if (history.size() < cfg.long_len) throw DataError("moving average: history shorter than long_len");
  const auto recent = history.last(cfg.short_len);
  const auto longer = history.last(cfg.long_len);
  return std::abs(mean_of(recent) - mean_of(longer)) > cfg.threshold;
}

void MovingVarianceCfg::validate() const {
  if (window_len < 2) throw ConfigError("moving variance: window_len must be >= 2");
  if (!(threshold > 0.0)) throw ConfigError("moving variance: threshold must be > 0");
}

bool moving_variance_step(const MovingVarianceCfg& cfg, std::span<const double> window) {
  if (window.size() < cfg.window_len) throw DataError("moving variance: window not full");
  return sample_variance(window.last(cfg.window_len)) - cfg.silence_variance > cfg.threshold;
}

// ---------------------------------------------------------------------------
// MLE

std::size_t MleModel::bin(double rss) {
  const long v = std::lround(rss);
  return static_cast<std::size_t>(std::clamp<long>(v, kLowDbm, kHighDbm) - kLowDbm);
}

MleModel MleModel::from_counts(std::vector<std::string> names, std::vector<StreamId> streams,
                               const std::vector<std::vector<std::vector<double>>>& counts) {
  constexpr std::size_t bins = kHighDbm - kLowDbm + 1;
  MleModel m;
  m.names_ = std::move(names);
  m.streams_ = std::move(streams);
  if (m.names_.empty() || m.names_.front() != "silence") throw DataError("MLE model needs a silence profile first");
  m.log_p_.resize(counts.size());
  for (std::size_t p = 0; p < counts.size(); ++p) {
    m.log_p_[p].resize(counts[p].size());
    for (std::size_t s = 0; s < counts[p].size(); ++s) {
      const auto& c = counts[p][s];
      const double total = std::accumulate(c.begin(), c.end(), 0.0) + static_cast<double>(bins);
      auto& lp = m.log_p_[p][s];
      lp.resize(bins);
      for (std::size_t b = 0; b < bins; ++b) lp[b] = std::log((c[b] + 1.0) / total);
    }
  }
  return m;
}

MleModel MleModel::train(const RssTrace& trace, const LabelTrack& labels) {
  constexpr std::size_t bins = kHighDbm - kLowDbm + 1;
  std::vector<std::string> names{"silence"};
  const auto streams = trace.streams();
  for (const auto& iv : labels.intervals()) {
    if (iv.label != Label::motion) continue;
    const auto name = iv.loc.value_or("motion");
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  }
  std::vector<std::vector<std::vector<double>>> counts(
      names.size(), std::vector<std::vector<double>>(streams.size(), std::vector<double>(bins, 0.0)));
  for (std::size_t s = 0; s < streams.size(); ++s) {
    for (const auto& sample : trace.samples(streams[s])) {
      const auto* iv = labels.find(sample.t);
      if (iv == nullptr) continue;
      std::size_t p = 0;
      if (iv->label == Label::motion) {
        const auto name = iv->loc.value_or("motion");
        p = static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
      }
      counts[p][s][bin(sample.rss)] += 1.0;
    }
  }
  return from_counts(std::move(names), streams, counts);
}

double MleModel::log_likelihood(std::size_t profile, std::size_t stream, double rss) const {
  return log_p_.at(profile).at(stream)[bin(rss)];
}

MleDecision mle_classify(const MleModel& model, std::span<const double> rss_vector) {
  if (rss_vector.size() != model.streams().size()) throw DataError("MLE: rss vector does not cover the model streams");
  MleDecision best;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < model.profile_names().size(); ++p) {
    double ll = 0.0;
    for (std::size_t s = 0; s < rss_vector.size(); ++s) ll += model.log_likelihood(p, s, rss_vector[s]);
    if (ll > best_ll) {  // strict: ties stay with the earlier profile, silence first
      best_ll = ll;
      best.profile = p;
    }
  }
  best.alarm = best.profile != 0;
  return best;
}

// ---------------------------------------------------------------------------
// chi-square

double chi_square_quantile(double dof, double p) {
  if (!(dof > 0.0) || !(p > 0.0 && p < 1.0)) throw DataError("chi_square_quantile: need dof > 0 and 0 < p < 1");
  auto f = [&](double x) { return boost::math::gamma_p(dof / 2.0, x / 2.0) - p; };
  double hi = std::max(1.0, dof);
  while (f(hi) < 0.0) hi *= 2.0;
  std::uintmax_t max_iter = 500;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-10; };
  const auto [a, b] = boost::math::tools::toms748_solve(f, 0.0, hi, -p, f(hi), tol, max_iter);
  return 0.5 * (a + b);
}

double chi_square_bound(const ParametricModel& model) {
  if (model.l < 2) throw ConfigError("parametric model: l must be >= 2");
  if (!(model.sigma2 > 0.0)) throw ConfigError("parametric model: sigma2 must be > 0");
  if (!(model.alpha > 0.0 && model.alpha < 1.0)) throw ConfigError("parametric model: alpha must lie in (0, 1)");
  const double dof = static_cast<double>(model.l - 1);
  return model.sigma2 * chi_square_quantile(dof, 1.0 - model.alpha) / dof;
}

// ---------------------------------------------------------------------------
// configuration

BaselineParams baseline_params_from_json(const json& doc) {
  BaselineParams p;
  try {
    if (doc.contains("moving_average")) {
      const auto& ma = doc["moving_average"];
      p.moving_average.short_len = ma.value("short_len", p.moving_average.short_len);
      p.moving_average.long_len = ma.value("long_len", p.moving_average.long_len);
      p.moving_average.threshold = ma.value("threshold", p.moving_average.threshold);
    }
    if (doc.contains("moving_variance")) {
      const auto& mv = doc["moving_variance"];
      p.moving_variance.window_len = mv.value("window_len", p.moving_variance.window_len);
      p.moving_variance.threshold = mv.value("threshold", p.moving_variance.threshold);
    }
    p.target_false_alarm = doc.value("target_false_alarm", p.target_false_alarm);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("baselines: ") + e.what());
  }
  p.moving_average.validate();
  p.moving_variance.validate();
  if (!(p.target_false_alarm > 0.0 && p.target_false_alarm < 1.0)) {
    throw ConfigError("baselines: target_false_alarm must lie in (0, 1)");
  }
  return p;
}

json to_json(const BaselineParams& p) {
  return json{{"moving_average",
               {{"short_len", p.moving_average.short_len},
                {"long_len", p.moving_average.long_len},
                {"threshold", p.moving_average.threshold}}},
              {"moving_variance",
               {{"window_len", p.moving_variance.window_len}, {"threshold", p.moving_variance.threshold}}},
              {"target_false_alarm", p.target_false_alarm}};
}

std::map<StreamId, MovingAverageCfg> calibrate_moving_average(const RssTrace& training,
                                                              const MovingAverageCfg& base,
                                                              double target_false_alarm) {
  std::map<StreamId, MovingAverageCfg> out;
  for (const auto& s : training.streams()) {
    const auto xs = stream_values(training, s);
    if (xs.size() < base.long_len) {
      throw DataError("moving average calibration: stream " + s.str() + " shorter than long_len");
    }
    std::vector<double> stats;
    for (std::size_t end = base.long_len; end <= xs.size(); ++end) {
      const std::span<const double> h(xs.data(), end);
      stats.push_back(std::abs(mean_of(h.last(base.short_len)) - mean_of(h.last(base.long_len))));
    }
    auto cfg = base;
    cfg.threshold = std::max(upper_quantile(std::move(stats), target_false_alarm), 1e-9);
    out[s] = cfg;
  }
  return out;
}

std::map<StreamId, MovingVarianceCfg> calibrate_moving_variance(const RssTrace& training,
                                                                const MovingVarianceCfg& base,
                                                                double target_false_alarm) {
  std::map<StreamId, MovingVarianceCfg> out;
  for (const auto& s : training.streams()) {
    const auto xs = stream_values(training, s);
    if (xs.size() < base.window_len + 1) {
      throw DataError("moving variance calibration: stream " + s.str() + " too short");
    }
    auto cfg = base;
    cfg.silence_variance = sample_variance(xs);
    std::vector<double> stats;
    for (std::size_t end = base.window_len; end <= xs.size(); ++end) {
      stats.push_back(sample_variance(std::span<const double>(xs.data() + end - base.window_len, base.window_len)) -
                      cfg.silence_variance);
    }
    cfg.threshold = std::max(upper_quantile(std::move(stats), target_false_alarm), 1e-9);
    out[s] = cfg;
  }
  return out;
}

namespace {

AlarmSeries empty_series(const TickGrid& grid) {
  AlarmSeries out;
  out.t.reserve(grid.ticks);
  for (std::size_t i = 0; i < grid.ticks; ++i) out.t.push_back(grid.time(i));
  out.alarm.assign(grid.ticks, false);
  return out;
}

template <typename Cfg>
const Cfg& cfg_for(const std::map<StreamId, Cfg>& cfgs, const StreamId& s) {
  const auto it = cfgs.find(s);
  if (it == cfgs.end()) throw DataError("no baseline calibration for stream " + s.str());
  return it->second;
}

}  // namespace

AlarmSeries run_moving_average(const RssTrace& trace, const std::map<StreamId, MovingAverageCfg>& cfgs,
                               double rate_hz) {
  const auto grid = align(trace, rate_hz);
  auto out = empty_series(grid);
  for (std::size_t j = 0; j < grid.streams.size(); ++j) {
    const auto& cfg = cfg_for(cfgs, grid.streams[j]);
    for (std::size_t i = 0; i < grid.ticks; ++i) {
      if (out.alarm[i] || !window_valid(grid, j, i, cfg.long_len)) continue;
      const std::span<const double> h(grid.values[j].data(), i + 1);
      if (moving_average_step(cfg, h)) out.alarm[i] = true;
    }
  }
  return out;
}

AlarmSeries run_moving_variance(const RssTrace& trace, const std::map<StreamId, MovingVarianceCfg>& cfgs,
                                double rate_hz) {
  const auto grid = align(trace, rate_hz);
  auto out = empty_series(grid);
  for (std::size_t j = 0; j < grid.streams.size(); ++j) {
    const auto& cfg = cfg_for(cfgs, grid.streams[j]);
    for (std::size_t i = 0; i < grid.ticks; ++i) {
      if (out.alarm[i] || !window_valid(grid, j, i, cfg.window_len)) continue;
      const std::span<const double> w(grid.values[j].data() + i + 1 - cfg.window_len, cfg.window_len);
      if (moving_variance_step(cfg, w)) out.alarm[i] = true;
    }
  }
  return out;
}

AlarmSeries run_mle(const RssTrace& trace, const MleModel& model, double rate_hz) {
  const auto grid = align(trace, rate_hz);
  auto out = empty_series(grid);
  std::vector<std::size_t> col;
  for (const auto& s : model.streams()) {
    const auto it = std::find(grid.streams.begin(), grid.streams.end(), s);
    if (it == grid.streams.end()) throw DataError("MLE: trace lacks stream " + s.str());
    col.push_back(static_cast<std::size_t>(it - grid.streams.begin()));
  }
  std::vector<double> vec(col.size());
  for (std::size_t i = 0; i < grid.ticks; ++i) {
    bool ok = true;
    for (std::size_t s = 0; s < col.size(); ++s) {
      ok = ok && grid.flags[col[s]][i] != TickGrid::Flag::invalid;
      vec[s] = grid.values[col[s]][i];
    }
    if (ok) out.alarm[i] = mle_classify(model, vec).alarm;
  }
  return out;
}

AlarmSeries run_parametric(const RssTrace& trace, const RssTrace& training, std::size_t l, double alpha,
                           double rate_hz) {
  const auto grid = align(trace, rate_hz);
  auto out = empty_series(grid);
  for (std::size_t j = 0; j < grid.streams.size(); ++j) {
    const auto xs = stream_values(training, grid.streams[j]);
    if (xs.size() < 2) throw DataError("parametric: stream " + grid.streams[j].str() + " lacks training data");
    const double u = chi_square_bound({sample_variance(xs), l, alpha});
    for (std::size_t i = 0; i < grid.ticks; ++i) {
      if (out.alarm[i] || !window_valid(grid, j, i, l)) continue;
      const std::span<const double> w(grid.values[j].data() + i + 1 - l, l);
      if (sample_variance(w) > u) out.alarm[i] = true;
    }
  }
  return out;
}

}  // namespace rasid
