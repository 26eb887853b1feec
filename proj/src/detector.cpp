#include "rasid/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "rasid/error.hpp"

namespace rasid {

using nlohmann::json;

namespace {

StreamVerdict score_window(const NormalProfile& profile, std::span<const double> window, double t) {
  StreamVerdict v;
  v.stream = profile.stream;
  v.t = t;
  v.x = feature(window, profile.feature);
  v.score = profile.score(v.x);
  v.anomalous = v.score > 1.0;
  return v;
}

}  // namespace

StreamVerdict basic_step(const NormalProfile& profile, const Window& window) {
  if (!(window.stream == profile.stream)) {
    throw DataError("window stream " + window.stream.str() + " does not match profile " +
                    profile.stream.str());
  }
  return score_window(profile, window.samples, window.end_t);
}

// ---------------------------------------------------------------------------
// refinement

void RefineParams::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0, 1]");
  if (!(rel_threshold > 0.0)) throw ConfigError("rel_threshold must be > 0");
  if (!(normal_rate >= 0.0 && normal_rate <= 1.0)) throw ConfigError("normal_rate must lie in [0, 1]");
  if (warmup_ticks == 0) throw ConfigError("warmup_ticks must be >= 1");
}

RefinementState::RefinementState(RefineParams p, std::size_t k) : params(p), streams(k) {
  params.validate();
}

std::pair<RefinementState, GlobalDecision> refine_step(RefinementState state,
                                                       std::span<const StreamVerdict> verdicts) {
  if (verdicts.size() != state.streams) {
    throw DataError("refine_step: expected " + std::to_string(state.streams) + " verdicts, got " +
                    std::to_string(verdicts.size()));
  }
  std::set<StreamId> seen;
  GlobalDecision d;
  if (!verdicts.empty()) d.t = verdicts.front().t;
  for (const auto& v : verdicts) {
    if (!seen.insert(v.stream).second) throw DataError("refine_step: duplicate verdict for " + v.stream.str());
    if (v.t != d.t) throw DataError("refine_step: verdicts from different ticks");
    if (!v.valid) continue;
    d.raw_sum += v.score;
    d.basic_alarm = d.basic_alarm || v.anomalous;
  }

  const auto& p = state.params;
  state.smoothed = state.initialized ? p.beta * d.raw_sum + (1.0 - p.beta) * state.smoothed : d.raw_sum;
  state.initialized = true;
  ++state.ticks;
  if (d.basic_alarm) {
    state.since_anomalous = 0;
  } else if (state.since_anomalous != static_cast<std::size_t>(-1)) {
    ++state.since_anomalous;
  }

  if (!state.normal_ready) {
    if (state.ticks >= p.warmup_ticks) {
      state.normal_level = state.smoothed;
      state.normal_ready = true;
    }
  } else {
    const double onset = (1.0 + p.rel_threshold) * state.normal_level;
    const double release = (1.0 + p.rel_threshold / 2.0) * state.normal_level;
    const bool recent_anomaly = state.since_anomalous <= p.onset_window;
    if (state.latched) {
      const bool quiet = p.hold_ticks > 0 && state.since_anomalous > p.hold_ticks;
      if (state.smoothed < release || quiet) state.latched = false;
    } else if (state.smoothed > onset && recent_anomaly) {
      state.latched = true;
    }
    d.refined_alarm = state.latched;
    if (!d.refined_alarm) state.normal_level += p.normal_rate * (state.smoothed - state.normal_level);
  }
  d.smoothed = state.smoothed;
  return {std::move(state), d};
}

// ---------------------------------------------------------------------------
// pipeline

void DetectorConfig::validate() const {
  if (l < 2) throw ConfigError("l must be >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (l_update == 0) throw ConfigError("l_update must be >= 1");
  if (!(rate_hz > 0.0)) throw ConfigError("rate_hz must be > 0");
  refine.validate();
}

DetectorConfig detector_config_from_json(const json& doc) {
  DetectorConfig cfg;
  try {
    cfg.l = doc.value("l", cfg.l);
    cfg.alpha = doc.value("alpha", cfg.alpha);
    cfg.l_update = doc.value("l_update", cfg.l_update);
    cfg.update = doc.value("update", cfg.update);
    if (doc.contains("feature")) cfg.feature = parse_feature_kind(doc["feature"].get<std::string>());
    cfg.rate_hz = doc.value("rate_hz", cfg.rate_hz);
    if (doc.contains("refine")) {
      const auto& r = doc["refine"];
      auto& p = cfg.refine;
      p.beta = r.value("beta", p.beta);
      p.rel_threshold = r.value("rel_threshold", p.rel_threshold);
      p.warmup_ticks = r.value("warmup_ticks", p.warmup_ticks);
      p.normal_rate = r.value("normal_rate", p.normal_rate);
      p.onset_window = r.value("onset_window", p.onset_window);
      p.hold_ticks = r.value("hold_ticks", p.hold_ticks);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("detector config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const DetectorConfig& cfg) {
  const auto& p = cfg.refine;
  return json{{"l", cfg.l},
              {"alpha", cfg.alpha},
              {"l_update", cfg.l_update},
              {"update", cfg.update},
              {"feature", to_string(cfg.feature)},
              {"rate_hz", cfg.rate_hz},
              {"refine",
               {{"beta", p.beta},
                {"rel_threshold", p.rel_threshold},
                {"warmup_ticks", p.warmup_ticks},
                {"normal_rate", p.normal_rate},
                {"onset_window", p.onset_window},
                {"hold_ticks", p.hold_ticks}}}};
}

namespace {

void run_stream(const TickGrid& grid, std::size_t j, const DetectorConfig& cfg, NormalProfile& profile,
                std::vector<StreamVerdict>& out) {
  const auto& vals = grid.values[j];
  const auto& flags = grid.flags[j];
  const UpdatePolicy policy{cfg.l_update};
  std::vector<ScoredFeature> group;
  group.reserve(cfg.l_update);
  std::size_t invalid_in_window = 0;
  out.resize(grid.ticks);
  for (std::size_t i = 0; i < grid.ticks; ++i) {
    if (flags[i] == TickGrid::Flag::invalid) ++invalid_in_window;
    if (i >= cfg.l && flags[i - cfg.l] == TickGrid::Flag::invalid) --invalid_in_window;

    if (i + 1 < cfg.l || invalid_in_window > 0) {
      out[i] = StreamVerdict{profile.stream, grid.time(i), 0.0, 0.0, false, false};
      group.clear();  // groups cover consecutive valid ticks only
      continue;
    }
    const std::span<const double> window(vals.data() + (i + 1 - cfg.l), cfg.l);
    out[i] = score_window(profile, window, grid.time(i));
    if (cfg.update) {
      group.push_back({out[i].x, out[i].score});
      if (group.size() == cfg.l_update) {
        profile = maybe_update(profile, group, policy);
        group.clear();
      }
    }
  }
}

}  // namespace

RunResult run(const RssTrace& trace, const ProfileBundle& profiles, const DetectorConfig& cfg,
              Execution exec) {
  cfg.validate();
  const TickGrid grid = align(trace, cfg.rate_hz);
  const std::size_t k = grid.streams.size();

  RunResult result;
  result.streams = grid.streams;
  for (const auto& s : grid.streams) {
    const auto* p = find_profile(profiles, s);
    if (p == nullptr) throw DataError("stream " + s.str() + " has no profile");
    if (p->window != 0 && p->window != cfg.l) {
      throw ConfigError("profile for " + s.str() + " was trained with l=" + std::to_string(p->window) +
                        " but the run uses l=" + std::to_string(cfg.l));
    }
    result.final_profiles.push_back(*p);
  }

  std::vector<std::vector<StreamVerdict>> by_stream(k);
  std::vector<std::exception_ptr> errors(k);
  auto body = [&](std::size_t j) {
    try {
      run_stream(grid, j, cfg, result.final_profiles[j], by_stream[j]);
    } catch (...) {
      errors[j] = std::current_exception();
    }
  };
  if (exec == Execution::parallel) {
    const auto kk = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t j = 0; j < kk; ++j) body(static_cast<std::size_t>(j));
  } else {
    for (std::size_t j = 0; j < k; ++j) body(j);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RefinementState state(cfg.refine, k);
  result.decisions.reserve(grid.ticks);
  result.verdicts.resize(grid.ticks);
  for (std::size_t i = 0; i < grid.ticks; ++i) {
    auto& row = result.verdicts[i];
    row.reserve(k);
    for (std::size_t j = 0; j < k; ++j) row.push_back(std::move(by_stream[j][i]));
    if (i + 1 < cfg.l) {
      result.decisions.push_back(GlobalDecision{grid.time(i), 0.0, 0.0, false, false});
      continue;
    }
    auto [next, decision] = refine_step(std::move(state), row);
    state = std::move(next);
    result.decisions.push_back(decision);
  }
  return result;
}

// ---------------------------------------------------------------------------
// logs

namespace {

std::ofstream open_log(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

template <typename F>
void read_jsonl(const std::filesystem::path& path, F&& on_record) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      if (rec.contains("meta")) continue;
      on_record(rec);
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

void write_decisions(const std::filesystem::path& path, std::span<const GlobalDecision> decisions,
                     const json& meta) {
  auto out = open_log(path);
  out << json{{"meta", meta}}.dump() << '\n';
  for (const auto& d : decisions) {
    out << json{{"t", d.t},
                {"raw_sum", d.raw_sum},
                {"smoothed", d.smoothed},
                {"basic_alarm", d.basic_alarm},
                {"refined_alarm", d.refined_alarm}}
               .dump()
        << '\n';
  }
}

void write_verdicts(const std::filesystem::path& path, const RunResult& result, const json& meta) {
  auto out = open_log(path);
  out << json{{"meta", meta}}.dump() << '\n';
  for (const auto& row : result.verdicts) {
    for (const auto& v : row) {
      if (!v.valid) continue;
      out << json{{"t", v.t}, {"stream", v.stream.str()}, {"x", v.x}, {"score", v.score}, {"anomalous", v.anomalous}}
                 .dump()
          << '\n';
    }
  }
}

std::vector<GlobalDecision> load_decisions(const std::filesystem::path& path) {
  std::vector<GlobalDecision> out;
  read_jsonl(path, [&](const json& rec) {
    out.push_back(GlobalDecision{rec.at("t").get<double>(), rec.at("raw_sum").get<double>(),
                                 rec.at("smoothed").get<double>(), rec.at("basic_alarm").get<bool>(),
                                 rec.at("refined_alarm").get<bool>()});
  });
  return out;
}

std::vector<std::vector<StreamVerdict>> load_verdicts(const std::filesystem::path& path) {
  std::vector<std::vector<StreamVerdict>> out;
  read_jsonl(path, [&](const json& rec) {
    StreamVerdict v;
    v.t = rec.at("t").get<double>();
    v.stream = StreamId::parse(rec.at("stream").get<std::string>());
    v.x = rec.at("x").get<double>();
    v.score = rec.at("score").get<double>();
    v.anomalous = rec.at("anomalous").get<bool>();
    if (out.empty() || out.back().front().t != v.t) out.emplace_back();
    out.back().push_back(std::move(v));
  });
  return out;
}

// ---------------------------------------------------------------------------
// region scoring

Heatmap region_heatmap(std::span<const StreamVerdict> verdicts, const SiteGeometry& geo,
                       double grid_res_m, double decay_m, Execution exec) {
  if (!(grid_res_m > 0.0)) throw ConfigError("heatmap resolution must be > 0");
  if (!(decay_m > 0.0)) throw ConfigError("heatmap decay must be > 0");
  const auto& b = geo.bounds;
  Heatmap map;
  map.grid.x0 = b.x0;
  map.grid.y0 = b.y0;
  map.grid.res = grid_res_m;
  map.grid.nx = static_cast<std::size_t>(std::floor((b.x1 - b.x0) / grid_res_m + 1e-9)) + 1;
  map.grid.ny = static_cast<std::size_t>(std::floor((b.y1 - b.y0) / grid_res_m + 1e-9)) + 1;
  if (map.grid.nx == 0 || map.grid.ny == 0 || !(b.x0 < b.x1 && b.y0 < b.y1)) {
    throw ConfigError("heatmap grid is empty");
  }
  std::vector<kernels::HeatSource> sources;
  for (const auto& v : verdicts) {
    if (!v.valid) continue;
    sources.push_back({geo.segment(v.stream), std::max(0.0, v.score - 1.0)});
  }
  map.values.assign(map.grid.nx * map.grid.ny, 0.0);
  if (exec == Execution::parallel) {
    kernels::parallel::heat_grid(sources, decay_m, map.grid, map.values);
  } else {
    kernels::serial::heat_grid(sources, decay_m, map.grid, map.values);
  }
  return map;
}

void write_heatmap_csv(const std::filesystem::path& path, const Heatmap& map, const Rect& bounds) {
  auto out = open_log(path);
  out << "# x0=" << bounds.x0 << ",y0=" << bounds.y0 << ",x1=" << bounds.x1 << ",y1=" << bounds.y1
      << ",resolution=" << map.grid.res << ",nx=" << map.grid.nx << ",ny=" << map.grid.ny << '\n';
  out << std::setprecision(6);
  for (std::size_t iy = 0; iy < map.grid.ny; ++iy) {
    for (std::size_t ix = 0; ix < map.grid.nx; ++ix) {
      if (ix > 0) out << ',';
      out << map.at(ix, iy);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// independent events

std::size_t IndependenceMatrix::index_of(const StreamId& s) const {
  const auto it = std::find(streams.begin(), streams.end(), s);
  if (it == streams.end()) throw DataError("stream " + s.str() + " not in independence matrix");
  return static_cast<std::size_t>(it - streams.begin());
}

IndependenceMatrix independence_matrix(const SiteGeometry& geo, Execution exec) {
  geo.validate();
  IndependenceMatrix m;
  m.streams = geo.streams;
  m.v_max = geo.v_max;
  std::vector<Segment> segments;
  for (const auto& s : geo.streams) segments.push_back(geo.segment(s));
  const std::size_t k = segments.size();
  m.d_min.assign(k * k, 0.0);
  if (exec == Execution::parallel) {
    kernels::parallel::segment_distances(segments, m.d_min);
  } else {
    kernels::serial::segment_distances(segments, m.d_min);
  }
  m.t_min.resize(k * k);
  for (std::size_t i = 0; i < k * k; ++i) m.t_min[i] = m.d_min[i] / geo.v_max;
  return m;
}

std::vector<DetectedEvent> extract_events(const RunResult& result) {
  std::vector<DetectedEvent> events;
  const std::size_t k = result.streams.size();
  for (std::size_t j = 0; j < k; ++j) {
    bool open = false;
    DetectedEvent current;
    for (const auto& row : result.verdicts) {
      const auto& v = row[j];
      if (v.valid && v.anomalous) {
        if (!open) {
          current = DetectedEvent{v.stream, v.t, v.score};
          open = true;
        } else if (v.score > current.peak_score) {
          current.peak_t = v.t;
          current.peak_score = v.score;
        }
      } else if (open) {
        events.push_back(current);
        open = false;
      }
    }
    if (open) events.push_back(current);
  }
  return events;
}

namespace {

// Bron-Kerbosch with pivoting; returns the maximum clique size.
void max_clique(const std::vector<std::vector<bool>>& adj, std::vector<std::size_t> r,
                std::vector<std::size_t> p, std::vector<std::size_t> x, std::size_t& best) {
  if (p.empty() && x.empty()) {
    best = std::max(best, r.size());
    return;
  }
  if (r.size() + p.size() <= best) return;
  std::size_t pivot = p.empty() ? x.front() : p.front();
  std::size_t pivot_deg = 0;
  for (auto cand : p) {
    std::size_t deg = 0;
    for (auto q : p) deg += adj[cand][q];
    if (deg >= pivot_deg) {
      pivot = cand;
      pivot_deg = deg;
    }
  }
  const auto candidates = p;
  for (auto v : candidates) {
    if (adj[pivot][v]) continue;
    std::vector<std::size_t> r2 = r, p2, x2;
    r2.push_back(v);
    for (auto q : p) if (adj[v][q]) p2.push_back(q);
    for (auto q : x) if (adj[v][q]) x2.push_back(q);
    max_clique(adj, std::move(r2), std::move(p2), std::move(x2), best);
    p.erase(std::find(p.begin(), p.end(), v));
    x.push_back(v);
  }
}

}  // namespace

IndependenceReport independent_events(std::vector<DetectedEvent> events, const IndependenceMatrix& m) {
  std::sort(events.begin(), events.end(), [](const DetectedEvent& a, const DetectedEvent& b) {
    if (a.peak_t != b.peak_t) return a.peak_t < b.peak_t;
    if (!(a.stream == b.stream)) return a.stream < b.stream;
    return a.peak_score < b.peak_score;
  });
  IndependenceReport report;
  const std::size_t n = events.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = m.index_of(events[i].stream);

  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  report.all_independent = true;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const bool indep = idx[a] != idx[b] &&
                         std::abs(events[a].peak_t - events[b].peak_t) < m.t(idx[a], idx[b]);
      adj[a][b] = adj[b][a] = indep;
      report.pairs.push_back({a, b, indep});
      report.all_independent = report.all_independent && indep;
    }
  }
  std::size_t best = 0;
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  max_clique(adj, {}, all, {}, best);
  report.independent_count = std::min(best, m.streams.size());
  report.events = std::move(events);
  return report;
}

}  // namespace rasid
