#include "rasid/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "rasid/error.hpp"

namespace rasid {

using nlohmann::json;

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

EvalReport report_from_counts(const ConfusionCounts& c) {
  EvalReport r;
  r.counts = c;
  r.fp_rate = ratio(c.fp, c.fp + c.tn);
  r.fn_rate = ratio(c.fn, c.fn + c.tp);
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.recall = ratio(c.tp, c.tp + c.fn);
  const double pr = r.precision + r.recall;
  r.f_measure = pr > 0.0 ? 2.0 * r.precision * r.recall / pr : 0.0;
  return r;
}

ConfusionCounts tally(const AlarmSeries& alarms, const LabelTrack& truth) {
  if (alarms.t.size() != alarms.alarm.size()) throw DataError("alarm series is ragged");
  ConfusionCounts c;
  for (std::size_t i = 0; i < alarms.t.size(); ++i) {
    const auto label = truth.label_at(alarms.t[i]);
    if (!label) {
      std::ostringstream msg;
      msg << "no ground truth covers t=" << alarms.t[i];
      throw DataError(msg.str());
    }
    const bool motion = *label == Label::motion;
    if (alarms.alarm[i]) {
      motion ? ++c.tp : ++c.fp;
    } else {
      motion ? ++c.fn : ++c.tn;
    }
  }
  return c;
}

LatencyStats latency(const AlarmSeries& alarms, const LabelTrack& truth) {
  LatencyStats out;
  if (alarms.t.empty()) return out;
  const double first = alarms.t.front();
  const double last = alarms.t.back();
  for (const auto& iv : truth.motion_intervals()) {
    if (iv.end <= first || iv.start > last) continue;
    const double start = std::max(iv.start, first);
    auto it = std::lower_bound(alarms.t.begin(), alarms.t.end(), start);
    std::optional<double> hit;
    for (; it != alarms.t.end() && *it < iv.end; ++it) {
      const auto i = static_cast<std::size_t>(it - alarms.t.begin());
      if (alarms.alarm[i]) {
        hit = *it - start;
        break;
      }
    }
    if (hit) {
      out.latencies.push_back(*hit);
      ++out.detected;
    } else {
      ++out.missed;
    }
  }
  if (!out.latencies.empty()) {
    auto sorted = out.latencies;
    std::sort(sorted.begin(), sorted.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(sorted.size())));
    out.p90 = sorted[std::max<std::size_t>(rank, 1) - 1];
  }
  return out;
}

EvalReport score(const AlarmSeries& alarms, const LabelTrack& truth) {
  auto r = report_from_counts(tally(alarms, truth));
  r.latency = latency(alarms, truth);
  return r;
}

EvalReport score(std::span<const GlobalDecision> decisions, const LabelTrack& truth) {
  return score(refined_alarms(decisions), truth);
}

AlarmSeries refined_alarms(std::span<const GlobalDecision> decisions) {
  AlarmSeries s;
  for (const auto& d : decisions) {
    s.t.push_back(d.t);
    s.alarm.push_back(d.refined_alarm);
  }
  return s;
}

AlarmSeries basic_alarms(std::span<const GlobalDecision> decisions) {
  AlarmSeries s;
  for (const auto& d : decisions) {
    s.t.push_back(d.t);
    s.alarm.push_back(d.basic_alarm);
  }
  return s;
}

json to_json(const EvalReport& r) {
  json lat = {{"latencies", r.latency.latencies},
              {"detected_intervals", r.latency.detected},
              {"missed_intervals", r.latency.missed}};
  lat["p90"] = r.latency.p90 ? json(*r.latency.p90) : json(nullptr);
  return json{{"tp", r.counts.tp},
              {"fp", r.counts.fp},
              {"tn", r.counts.tn},
              {"fn", r.counts.fn},
              {"fp_rate", r.fp_rate},
              {"fn_rate", r.fn_rate},
              {"precision", r.precision},
              {"recall", r.recall},
              {"f_measure", r.f_measure},
              {"latency", lat}};
}

namespace {

std::string fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

std::string p90_text(const LatencyStats& l) { return l.p90 ? fixed4(*l.p90) : std::string("n/a"); }

}  // namespace

std::string format_report(const EvalReport& r) {
  std::ostringstream s;
  s << std::left;
  s << std::setw(18) << "FN rate" << fixed4(r.fn_rate) << '\n';
  s << std::setw(18) << "FP rate" << fixed4(r.fp_rate) << '\n';
  s << std::setw(18) << "Precision" << fixed4(r.precision) << '\n';
  s << std::setw(18) << "Recall" << fixed4(r.recall) << '\n';
  s << std::setw(18) << "F-measure" << fixed4(r.f_measure) << '\n';
  s << std::setw(18) << "Latency p90 (s)" << p90_text(r.latency) << '\n';
  s << std::setw(18) << "Missed intervals" << r.latency.missed << '\n';
  return s.str();
}

namespace {

void check_reports(std::span<const NamedReport> reports) {
  if (reports.size() < 2) throw ConfigError("compare needs at least two reports");
  std::set<std::string> names;
  for (const auto& r : reports) {
    if (r.detector.empty()) throw ConfigError("compare: empty detector name");
    if (!names.insert(r.detector).second) throw ConfigError("compare: duplicate detector '" + r.detector + "'");
  }
}

const std::vector<std::string>& columns() {
  static const std::vector<std::string> cols{"detector", "fn_rate", "fp_rate", "precision",
                                             "recall", "f_measure", "latency_p90"};
  return cols;
}

}  // namespace

json compare(std::span<const NamedReport> reports) {
  check_reports(reports);
  json rows = json::array();
  json params = json::object();
  for (const auto& r : reports) {
    rows.push_back(json::array({r.detector, r.report.fn_rate, r.report.fp_rate, r.report.precision,
                                r.report.recall, r.report.f_measure,
                                r.report.latency.p90 ? json(*r.report.latency.p90) : json(nullptr)}));
    params[r.detector] = r.parameters;
  }
  return json{{"columns", columns()}, {"rows", rows}, {"parameters", params}};
}

std::string format_comparison(std::span<const NamedReport> reports) {
  check_reports(reports);
  std::size_t name_w = std::string("detector").size();
  for (const auto& r : reports) name_w = std::max(name_w, r.detector.size());
  std::ostringstream s;
  s << std::left << std::setw(static_cast<int>(name_w) + 2) << "detector";
  for (std::size_t c = 1; c < columns().size(); ++c) s << std::right << std::setw(13) << columns()[c];
  s << '\n';
  for (const auto& r : reports) {
    s << std::left << std::setw(static_cast<int>(name_w) + 2) << r.detector << std::right;
    s << std::setw(13) << fixed4(r.report.fn_rate) << std::setw(13) << fixed4(r.report.fp_rate)
      << std::setw(13) << fixed4(r.report.precision) << std::setw(13) << fixed4(r.report.recall)
      << std::setw(13) << fixed4(r.report.f_measure) << std::setw(13) << p90_text(r.report.latency) << '\n';
  }
  return s.str();
}

}  // namespace rasid
