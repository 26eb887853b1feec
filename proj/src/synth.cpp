#include "rasid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rasid/error.hpp"
#include "rasid/random.hpp"

namespace rasid {

using nlohmann::json;

void SynthConfig::validate() const {
  if (!(rate_hz > 0.0)) throw ConfigError("synth: rate_hz must be > 0");
  if (!(duration_s > 0.0)) throw ConfigError("synth: duration_s must be > 0");
  if (!(motion_std_factor > 1.0)) throw ConfigError("synth: motion_std_factor must be > 1");
  if (!(influence_radius_m >= 0.0)) throw ConfigError("synth: influence_radius_m must be >= 0");
  if (noise == NoiseKind::student_t && t_dof < 3) {
    throw ConfigError("synth: t_dof must be >= 3 for unit-variance scaling");
  }
  if (quantum_db < 0.0) throw ConfigError("synth: quantum_db must be >= 0");
  auto check_std = [](const StreamSilence& s) {
    if (!(s.std > 0.0) || !std::isfinite(s.mean)) throw ConfigError("synth: silence std must be > 0");
  };
  check_std(silence);
  for (const auto& [_, s] : overrides) check_std(s);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& m = schedule[i];
    if (!(m.start < m.end) || m.start < 0.0 || m.end > duration_s) {
      std::ostringstream msg;
      msg << "synth: motion span [" << m.start << ", " << m.end << ") is not within [0, "
          << duration_s << ")";
      throw ConfigError(msg.str());
    }
    if (m.path.empty()) throw ConfigError("synth: motion span without waypoints");
    if (i > 0 && m.start < schedule[i - 1].end) {
      throw ConfigError("synth: motion spans must be sorted and non-overlapping");
    }
  }
}

StreamSilence SynthConfig::silence_for(const StreamId& stream) const {
  const auto it = overrides.find(stream);
  return it == overrides.end() ? silence : it->second;
}

SynthConfig synth_config_from_json(const json& doc) {
  SynthConfig cfg;
  try {
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.duration_s = doc.value("duration_s", cfg.duration_s);
    cfg.rate_hz = doc.value("rate_hz", cfg.rate_hz);
    if (doc.contains("silence")) {
      cfg.silence.mean = doc["silence"].value("mean", cfg.silence.mean);
      cfg.silence.std = doc["silence"].value("std", cfg.silence.std);
    }
    if (doc.contains("streams")) {
      for (const auto& [name, s] : doc["streams"].items()) {
        StreamSilence v = cfg.silence;
        v.mean = s.value("mean", v.mean);
        v.std = s.value("std", v.std);
        cfg.overrides[StreamId::parse(name)] = v;
      }
    }
    cfg.motion_std_factor = doc.value("motion_std_factor", cfg.motion_std_factor);
    cfg.drift_per_hour = doc.value("drift_per_hour", cfg.drift_per_hour);
    cfg.std_drift_per_hour = doc.value("std_drift_per_hour", cfg.std_drift_per_hour);
    const auto noise = doc.value("noise", std::string("gaussian"));
    if (noise == "gaussian") {
      cfg.noise = NoiseKind::gaussian;
    } else if (noise == "student_t") {
      cfg.noise = NoiseKind::student_t;
    } else {
      throw ConfigError("synth: unknown noise kind '" + noise + "'");
    }
    cfg.t_dof = doc.value("t_dof", cfg.t_dof);
    cfg.influence_radius_m = doc.value("influence_radius_m", cfg.influence_radius_m);
    cfg.quantum_db = doc.value("quantum_db", cfg.quantum_db);
    if (doc.contains("schedule")) {
      for (const auto& m : doc["schedule"]) {
        MotionSpan span;
        span.start = m.at("start").get<double>();
        span.end = m.at("end").get<double>();
        for (const auto& p : m.at("path")) span.path.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        if (m.contains("loc")) span.loc = m["loc"].get<std::string>();
        cfg.schedule.push_back(std::move(span));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  } catch (const DataError& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const SynthConfig& cfg) {
  json doc;
  doc["seed"] = cfg.seed;
  doc["duration_s"] = cfg.duration_s;
  doc["rate_hz"] = cfg.rate_hz;
  doc["silence"] = {{"mean", cfg.silence.mean}, {"std", cfg.silence.std}};
  json streams = json::object();
  for (const auto& [id, s] : cfg.overrides) streams[id.str()] = {{"mean", s.mean}, {"std", s.std}};
  doc["streams"] = streams;
  doc["motion_std_factor"] = cfg.motion_std_factor;
  doc["drift_per_hour"] = cfg.drift_per_hour;
  doc["std_drift_per_hour"] = cfg.std_drift_per_hour;
  doc["noise"] = cfg.noise == NoiseKind::gaussian ? "gaussian" : "student_t";
  doc["t_dof"] = cfg.t_dof;
  doc["influence_radius_m"] = cfg.influence_radius_m;
  doc["quantum_db"] = cfg.quantum_db;
  json schedule = json::array();
  for (const auto& m : cfg.schedule) {
    json path = json::array();
    for (const auto& p : m.path) path.push_back({p.x, p.y});
    json span = {{"start", m.start}, {"end", m.end}, {"path", path}};
    if (m.loc) span["loc"] = *m.loc;
    schedule.push_back(span);
  }
  doc["schedule"] = schedule;
  return doc;
}

std::optional<Point> walker_position(const std::vector<MotionSpan>& schedule, double t) {
  for (const auto& m : schedule) {
    if (t < m.start || t >= m.end) continue;
    if (m.path.size() == 1) return m.path.front();
    double total = 0.0;
    for (std::size_t i = 1; i < m.path.size(); ++i) total += distance(m.path[i - 1], m.path[i]);
    if (total == 0.0) return m.path.front();
    double along = (t - m.start) / (m.end - m.start) * total;
    for (std::size_t i = 1; i < m.path.size(); ++i) {
      const double leg = distance(m.path[i - 1], m.path[i]);
      if (along <= leg && leg > 0.0) {
        const double u = along / leg;
        const Point a = m.path[i - 1];
        const Point b = m.path[i];
        return Point{a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
      }
      along -= leg;
    }
    return m.path.back();
  }
  return std::nullopt;
}

SyntheticRun generate_synthetic(const SynthConfig& cfg, const SiteGeometry& geo) {
  cfg.validate();
  geo.validate();
  for (const auto& m : cfg.schedule) {
    for (const auto& p : m.path) {
      if (!geo.bounds.contains(p)) {
        std::ostringstream msg;
        msg << "synth: waypoint (" << p.x << ", " << p.y << ") lies outside the site bounds";
        throw ConfigError(msg.str());
      }
    }
  }

  const auto n_ticks = static_cast<std::size_t>(std::floor(cfg.duration_s * cfg.rate_hz));
  const std::size_t k = geo.streams.size();
  std::vector<Segment> segments;
  std::vector<StreamSilence> silence;
  for (const auto& s : geo.streams) {
    segments.push_back(geo.segment(s));
    silence.push_back(cfg.silence_for(s));
  }

  Rng rng(cfg.seed);
  std::vector<std::vector<RssSample>> per_stream(k);
  for (auto& v : per_stream) v.reserve(n_ticks);

  for (std::size_t i = 0; i < n_ticks; ++i) {
    const double t = static_cast<double>(i) / cfg.rate_hz;
    const double hours = t / 3600.0;
    const auto walker = walker_position(cfg.schedule, t);
    for (std::size_t j = 0; j < k; ++j) {
      // one noise draw per (tick, stream) keeps the draw sequence independent of motion
      const double z = cfg.noise == NoiseKind::gaussian ? rng.normal() : rng.student_t_unit(cfg.t_dof);
      double sd = std::max(1e-3, silence[j].std + cfg.std_drift_per_hour * hours);
      if (walker && point_segment_distance(*walker, segments[j]) <= cfg.influence_radius_m) {
        sd *= cfg.motion_std_factor;
      }
      double rss = silence[j].mean + cfg.drift_per_hour * hours + sd * z;
      if (cfg.quantum_db > 0.0) rss = std::round(rss / cfg.quantum_db) * cfg.quantum_db;
      per_stream[j].push_back({t, rss});
    }
  }

  SyntheticRun run;
  for (std::size_t j = 0; j < k; ++j) {
    for (const auto& s : per_stream[j]) run.trace.add(geo.streams[j], s.t, s.rss);
  }

  std::vector<LabelInterval> intervals;
  double cursor = 0.0;
  for (const auto& m : cfg.schedule) {
    if (m.start > cursor) intervals.push_back({cursor, m.start, Label::silence, std::nullopt});
    intervals.push_back({m.start, m.end, Label::motion, m.loc});
    cursor = m.end;
  }
  if (cursor < cfg.duration_s) intervals.push_back({cursor, cfg.duration_s, Label::silence, std::nullopt});
  run.labels = LabelTrack(std::move(intervals));
  return run;
}

}  // namespace rasid
