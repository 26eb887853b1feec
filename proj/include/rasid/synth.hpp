#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rasid/geometry.hpp"
#include "rasid/trace.hpp"

namespace rasid {

/// One walk through the site: the walker moves along `path` at constant speed
/// between start and end. A single waypoint means pacing on the spot.
struct MotionSpan {
  double start = 0.0;
  double end = 0.0;
  std::vector<Point> path;
  std::optional<std::string> loc;
};

enum class NoiseKind { gaussian, student_t };

struct StreamSilence {
  double mean = -60.0;  // dBm
  double std = 1.0;     // dB
};

struct SynthConfig {
  std::uint64_t seed = 1;
  double duration_s = 600.0;
  double rate_hz = 1.0;
  StreamSilence silence;                        // default for every stream
  std::map<StreamId, StreamSilence> overrides;  // per-stream values
  double motion_std_factor = 3.0;
  double drift_per_hour = 0.0;      // dB/h added to the mean
  double std_drift_per_hour = 0.0;  // dB/h added to the silence std
  NoiseKind noise = NoiseKind::gaussian;
  int t_dof = 4;
  double influence_radius_m = 1.5;
  double quantum_db = 0.01;  // output resolution; 0 disables rounding
  std::vector<MotionSpan> schedule;

  /// Throws ConfigError on invalid fields.
  void validate() const;
  [[nodiscard]] StreamSilence silence_for(const StreamId& stream) const;
};

SynthConfig synth_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SynthConfig& cfg);

struct SyntheticRun {
  RssTrace trace;
  LabelTrack labels;
};

/// Pure function of (cfg, geo). Samples tick at t = i / rate_hz for
/// i in [0, floor(duration_s * rate_hz)).
SyntheticRun generate_synthetic(const SynthConfig& cfg, const SiteGeometry& geo);

/// Walker position at time t, or nullopt outside every motion span.
std::optional<Point> walker_position(const std::vector<MotionSpan>& schedule, double t);

}  // namespace rasid
