#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rasid/kernels.hpp"
#include "rasid/profiling.hpp"
#include "rasid/trace.hpp"

namespace rasid {

struct StreamVerdict {
  StreamId stream;
  double t = 0.0;
  double x = 0.0;      // window feature
  double score = 0.0;  // x / u
  bool anomalous = false;
  bool valid = true;   // false when the window touches an invalid tick
};

/// Scores one window against its stream's silence profile.
StreamVerdict basic_step(const NormalProfile& profile, const Window& window);

struct RefineParams {
  double beta = 0.04;            // smoothing coefficient
  double rel_threshold = 0.225;  // rise over the normal level that starts an episode
  std::size_t warmup_ticks = 60;
  double normal_rate = 0.005;    // running-mean coefficient of the normal level
  /// An episode may start only if some stream was anomalous within this many
  /// ticks (0 = the current tick).
  std::size_t onset_window = 5;
  /// While latched, the episode also ends once no stream has been anomalous
  /// for more than this many ticks. 0 disables the check.
  std::size_t hold_ticks = 5;

  void validate() const;
};

/// Fusion state over the summed anomaly scores of all streams.
struct RefinementState {
  RefineParams params;
  std::size_t streams = 0;  // k, verdicts expected per tick
  double smoothed = 0.0;
  double normal_level = 0.0;
  bool initialized = false;
  bool normal_ready = false;
  bool latched = false;
  std::size_t ticks = 0;
  std::size_t since_anomalous = static_cast<std::size_t>(-1);

  RefinementState(RefineParams p, std::size_t k);
};

struct GlobalDecision {
  double t = 0.0;
  double raw_sum = 0.0;
  double smoothed = 0.0;
  bool basic_alarm = false;
  bool refined_alarm = false;
};

/// One fusion tick. Throws DataError unless there is exactly one verdict per
/// stream, all at the same time.
std::pair<RefinementState, GlobalDecision> refine_step(RefinementState state,
                                                       std::span<const StreamVerdict> verdicts);

struct DetectorConfig {
  std::size_t l = 5;
  double alpha = 0.01;
  std::size_t l_update = 15;
  bool update = true;
  FeatureKind feature = FeatureKind::variance;
  double rate_hz = 1.0;
  RefineParams refine;

  void validate() const;
};

/// Missing keys keep their defaults; the result is validated.
DetectorConfig detector_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const DetectorConfig& cfg);

enum class Execution { serial, parallel };

struct RunResult {
  std::vector<StreamId> streams;
  std::vector<GlobalDecision> decisions;
  std::vector<std::vector<StreamVerdict>> verdicts;  // [tick][stream]
  ProfileBundle final_profiles;
};

/// Monitoring phase over the whole trace: windows -> basic_step ->
/// maybe_update -> refine_step, in tick order.
///
/// Streams are independent until the fusion step, so the per-stream part runs
/// as one OpenMP task per stream under Execution::parallel; the result is
/// identical to Execution::serial.
RunResult run(const RssTrace& trace, const ProfileBundle& profiles, const DetectorConfig& cfg,
              Execution exec = Execution::parallel);

void write_decisions(const std::filesystem::path& path, std::span<const GlobalDecision> decisions,
                     const nlohmann::json& meta);
void write_verdicts(const std::filesystem::path& path, const RunResult& result,
                    const nlohmann::json& meta);
std::vector<GlobalDecision> load_decisions(const std::filesystem::path& path);
/// Verdict log grouped by tick, streams in log order.
std::vector<std::vector<StreamVerdict>> load_verdicts(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// region scoring

struct Heatmap {
  kernels::GridSpec grid;
  std::vector<double> values;  // row-major, ny rows of nx

  [[nodiscard]] double at(std::size_t ix, std::size_t iy) const { return values[iy * grid.nx + ix]; }
};

/// heat(p) = sum_j max(0, score_j - 1) * exp(-d(p, segment_j) / decay_m).
Heatmap region_heatmap(std::span<const StreamVerdict> verdicts, const SiteGeometry& geo,
                       double grid_res_m, double decay_m = 2.0,
                       Execution exec = Execution::parallel);

void write_heatmap_csv(const std::filesystem::path& path, const Heatmap& map, const Rect& bounds);

// ---------------------------------------------------------------------------
// independent events

struct DetectedEvent {
  StreamId stream;
  double peak_t = 0.0;
  double peak_score = 0.0;
};

struct IndependenceMatrix {
  std::vector<StreamId> streams;
  std::vector<double> d_min;  // k x k, metres
  std::vector<double> t_min;  // k x k, seconds
  double v_max = 1.0;

  [[nodiscard]] std::size_t index_of(const StreamId& s) const;
  [[nodiscard]] double t(std::size_t i, std::size_t j) const { return t_min[i * streams.size() + j]; }
  [[nodiscard]] double d(std::size_t i, std::size_t j) const { return d_min[i * streams.size() + j]; }
};

IndependenceMatrix independence_matrix(const SiteGeometry& geo, Execution exec = Execution::parallel);

/// Maximal runs of anomalous ticks per stream, peak at the highest score.
std::vector<DetectedEvent> extract_events(const RunResult& result);

struct PairIndependence {
  std::size_t a = 0;  // indices into IndependenceReport::events
  std::size_t b = 0;
  bool independent = false;
};

struct IndependenceReport {
  std::vector<DetectedEvent> events;  // canonical order (peak_t, stream)
  std::vector<PairIndependence> pairs;
  bool all_independent = false;
  /// Size of the largest set of pairwise independent events, at most k.
  std::size_t independent_count = 0;
};

/// Two events are independent when they hit different streams and their peak
/// times differ by less than the minimum travel time between the streams.
IndependenceReport independent_events(std::vector<DetectedEvent> events, const IndependenceMatrix& m);

}  // namespace rasid
