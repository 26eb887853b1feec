#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rasid/baselines.hpp"
#include "rasid/detector.hpp"
#include "rasid/trace.hpp"

namespace rasid {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  [[nodiscard]] std::size_t total() const { return tp + fp + tn + fn; }
};

struct LatencyStats {
  std::vector<double> latencies;  // seconds, one per detected motion interval
  std::size_t detected = 0;
  std::size_t missed = 0;
  std::optional<double> p90;  // nearest-rank 90th percentile
};

struct EvalReport {
  ConfusionCounts counts;
  double fp_rate = 0.0;
  double fn_rate = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  LatencyStats latency;
};

/// Rates from counts; zero denominators give 0.
EvalReport report_from_counts(const ConfusionCounts& c);

/// Per-tick tally of alarms against truth. Throws DataError for a tick the
/// truth does not cover.
ConfusionCounts tally(const AlarmSeries& alarms, const LabelTrack& truth);

LatencyStats latency(const AlarmSeries& alarms, const LabelTrack& truth);

/// Counts, rates and latency in one go.
EvalReport score(const AlarmSeries& alarms, const LabelTrack& truth);
EvalReport score(std::span<const GlobalDecision> decisions, const LabelTrack& truth);

AlarmSeries refined_alarms(std::span<const GlobalDecision> decisions);
AlarmSeries basic_alarms(std::span<const GlobalDecision> decisions);

nlohmann::json to_json(const EvalReport& r);
/// Aligned plain-text block, four decimals.
std::string format_report(const EvalReport& r);

struct NamedReport {
  std::string detector;
  EvalReport report;
  nlohmann::json parameters = nlohmann::json::object();
};

/// Comparison table with fixed column order. Needs at least two reports and
/// non-empty, distinct detector names.
nlohmann::json compare(std::span<const NamedReport> reports);
std::string format_comparison(std::span<const NamedReport> reports);

}  // namespace rasid
