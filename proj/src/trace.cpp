#include "rasid/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rasid/error.hpp"

namespace rasid {

using nlohmann::json;

StreamId StreamId::parse(std::string_view text) {
  const auto dash = text.find('-');
  if (dash == std::string_view::npos || dash == 0 || dash + 1 >= text.size() ||
      text.find('-', dash + 1) != std::string_view::npos) {
    throw DataError("malformed stream id '" + std::string(text) + "', expected AP-MP");
  }
  return StreamId{std::string(text.substr(0, dash)), std::string(text.substr(dash + 1))};
}

// ---------------------------------------------------------------------------
// RssTrace

void RssTrace::add(const StreamId& stream, double t, double rss) {
  if (!std::isfinite(t) || !std::isfinite(rss)) {
    throw DataError("non-finite sample on stream " + stream.str());
  }
  auto& samples = data_[stream];
  if (!samples.empty() && t <= samples.back().t) {
    std::ostringstream msg;
    msg << "non-monotone timestamp on stream " << stream.str() << " at t=" << t;
    throw DataError(msg.str());
  }
  samples.push_back({t, rss});
}

std::vector<StreamId> RssTrace::streams() const {
  std::vector<StreamId> out;
  out.reserve(data_.size());
  for (const auto& [id, _] : data_) out.push_back(id);
  return out;
}

std::span<const RssSample> RssTrace::samples(const StreamId& stream) const {
  const auto it = data_.find(stream);
  if (it == data_.end()) throw DataError("stream " + stream.str() + " not in trace");
  return it->second;
}

std::size_t RssTrace::total_samples() const {
  std::size_t n = 0;
  for (const auto& [_, s] : data_) n += s.size();
  return n;
}

std::pair<double, double> RssTrace::time_range() const {
  bool any = false;
  double lo = 0.0, hi = 0.0;
  for (const auto& [_, s] : data_) {
    if (s.empty()) continue;
    if (!any) {
      lo = s.front().t;
      hi = s.back().t;
      any = true;
    } else {
      lo = std::min(lo, s.front().t);
      hi = std::max(hi, s.back().t);
    }
  }
  return {lo, hi};
}

RssTrace RssTrace::slice(double t0, double t1) const {
  RssTrace out;
  for (const auto& [id, s] : data_) {
    auto& dst = out.data_[id];
    for (const auto& sample : s) {
      if (sample.t >= t0 && sample.t < t1) dst.push_back(sample);
    }
  }
  return out;
}

RssTrace RssTrace::shifted(double db) const {
  RssTrace out = *this;
  for (auto& [_, s] : out.data_) {
    for (auto& sample : s) sample.rss += db;
  }
  return out;
}

RssTrace RssTrace::drifted(double rate_db_per_s, double t_ref) const {
  RssTrace out = *this;
  for (auto& [_, s] : out.data_) {
    for (auto& sample : s) sample.rss += rate_db_per_s * (sample.t - t_ref);
  }
  return out;
}

bool RssTrace::operator==(const RssTrace& other) const {
  if (data_.size() != other.data_.size()) return false;
  auto it = other.data_.begin();
  for (const auto& [id, s] : data_) {
    if (!(id == it->first) || s.size() != it->second.size()) return false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i].t != it->second[i].t || s[i].rss != it->second[i].rss) return false;
    }
    ++it;
  }
  return true;
}

// ---------------------------------------------------------------------------
// trace files

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line_no,
                             const std::string& why) {
  throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + why);
}

double parse_double(const std::string& field, const std::filesystem::path& path,
                    std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    parse_fail(path, line_no, "not a number: '" + field + "'");
  }
  while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used]))) ++used;
  if (used != field.size()) parse_fail(path, line_no, "not a number: '" + field + "'");
  return v;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

RssTrace load_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  RssTrace trace;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(trim(f));
    if (!header_seen) {
      if (fields != std::vector<std::string>{"t", "stream", "rss"}) {
        parse_fail(path, line_no, "expected header t,stream,rss");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) parse_fail(path, line_no, "expected 3 fields");
    const double t = parse_double(fields[0], path, line_no);
    const double rss = parse_double(fields[2], path, line_no);
    StreamId id;
    try {
      id = StreamId::parse(fields[1]);
    } catch (const DataError& e) {
      parse_fail(path, line_no, e.what());
    }
    trace.add(id, t, rss);
  }
  return trace;
}

json parse_json_line(const std::string& line, const std::filesystem::path& path,
                     std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    parse_fail(path, line_no, e.what());
  }
}

}  // namespace

RssTrace load_trace(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return load_csv(path);
  auto in = open_input(path);
  RssTrace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const json rec = parse_json_line(line, path, line_no);
    if (!rec.is_object() || !rec.contains("t") || !rec.contains("stream") ||
        !rec.contains("rss") || !rec["t"].is_number() || !rec["rss"].is_number() ||
        !rec["stream"].is_string()) {
      parse_fail(path, line_no, "record needs numeric t, rss and string stream");
    }
    StreamId id;
    try {
      id = StreamId::parse(rec["stream"].get<std::string>());
    } catch (const DataError& e) {
      parse_fail(path, line_no, e.what());
    }
    trace.add(id, rec["t"].get<double>(), rec["rss"].get<double>());
  }
  return trace;
}

void write_trace(const std::filesystem::path& path, const RssTrace& trace) {
  struct Row {
    double t;
    const StreamId* stream;
    double rss;
  };
  const auto ids = trace.streams();
  std::vector<Row> rows;
  rows.reserve(trace.total_samples());
  for (const auto& id : ids) {
    for (const auto& s : trace.samples(id)) rows.push_back({s.t, &id, s.rss});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.t < b.t; });
  auto out = open_output(path);
  for (const auto& r : rows) {
    json rec = {{"t", r.t}, {"stream", r.stream->str()}, {"rss", r.rss}};
    out << rec.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// windows

std::vector<Window> windows(const RssTrace& trace, const StreamId& stream, std::size_t l) {
  if (l < 2) throw DataError("window length must be >= 2");
  const auto samples = trace.samples(stream);
  std::vector<Window> out;
  if (samples.size() < l) return out;
  out.reserve(samples.size() - l + 1);
  for (std::size_t end = l; end <= samples.size(); ++end) {
    Window w{stream, samples[end - 1].t, {}};
    w.samples.reserve(l);
    for (std::size_t i = end - l; i < end; ++i) w.samples.push_back(samples[i].rss);
    out.push_back(std::move(w));
  }
  return out;
}

// ---------------------------------------------------------------------------
// labels

bool operator==(const LabelInterval& a, const LabelInterval& b) {
  return a.start == b.start && a.end == b.end && a.label == b.label && a.loc == b.loc;
}

LabelTrack::LabelTrack(std::vector<LabelInterval> intervals) : intervals_(std::move(intervals)) {
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const auto& iv = intervals_[i];
    if (!(iv.start < iv.end)) {
      std::ostringstream msg;
      msg << "label interval [" << iv.start << ", " << iv.end << ") is empty";
      throw DataError(msg.str());
    }
    if (i > 0 && iv.start < intervals_[i - 1].end) {
      std::ostringstream msg;
      msg << "label intervals overlap or are unsorted at start=" << iv.start;
      throw DataError(msg.str());
    }
  }
}

const LabelInterval* LabelTrack::find(double t) const {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                             [](double v, const LabelInterval& iv) { return v < iv.start; });
  if (it == intervals_.begin()) return nullptr;
  --it;
  return t < it->end ? &*it : nullptr;
}

std::optional<Label> LabelTrack::label_at(double t) const {
  const auto* iv = find(t);
  if (iv == nullptr) return std::nullopt;
  return iv->label;
}

std::vector<LabelInterval> LabelTrack::motion_intervals() const {
  std::vector<LabelInterval> out;
  for (const auto& iv : intervals_) {
    if (iv.label == Label::motion) out.push_back(iv);
  }
  return out;
}

bool LabelTrack::all_silence(double t0, double t1) const {
  return std::none_of(intervals_.begin(), intervals_.end(), [&](const LabelInterval& iv) {
    return iv.label == Label::motion && iv.start < t1 && t0 < iv.end;
  });
}

LabelTrack load_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<LabelInterval> intervals;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const json rec = parse_json_line(line, path, line_no);
    if (!rec.is_object() || !rec.contains("start") || !rec.contains("end") ||
        !rec.contains("label") || !rec["start"].is_number() || !rec["end"].is_number() ||
        !rec["label"].is_string()) {
      parse_fail(path, line_no, "record needs numeric start, end and string label");
    }
    LabelInterval iv;
    iv.start = rec["start"].get<double>();
    iv.end = rec["end"].get<double>();
    const auto label = rec["label"].get<std::string>();
    if (label == "motion") {
      iv.label = Label::motion;
    } else if (label == "silence") {
      iv.label = Label::silence;
    } else {
      parse_fail(path, line_no, "unknown label '" + label + "'");
    }
    if (rec.contains("loc")) {
      if (!rec["loc"].is_string()) parse_fail(path, line_no, "loc must be a string");
      iv.loc = rec["loc"].get<std::string>();
    }
    intervals.push_back(std::move(iv));
  }
  try {
    return LabelTrack(std::move(intervals));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_labels(const std::filesystem::path& path, const LabelTrack& labels) {
  auto out = open_output(path);
  for (const auto& iv : labels.intervals()) {
    json rec = {{"start", iv.start},
                {"end", iv.end},
                {"label", iv.label == Label::motion ? "motion" : "silence"}};
    if (iv.loc) rec["loc"] = *iv.loc;
    out << rec.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// geometry

void SiteGeometry::validate() const {
  if (!(v_max > 0.0)) throw ConfigError("geometry: v_max must be > 0");
  if (!(bounds.x0 < bounds.x1 && bounds.y0 < bounds.y1)) {
    throw ConfigError("geometry: bounds must be [x0,y0,x1,y1] with x0<x1, y0<y1");
  }
  for (const auto& s : streams) {
    if (!nodes.contains(s.ap) || !nodes.contains(s.mp)) {
      throw ConfigError("geometry: stream " + s.str() + " references an unknown node");
    }
  }
  auto sorted = streams;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("geometry: duplicate stream");
  }
}

Segment SiteGeometry::segment(const StreamId& stream) const {
  const auto a = nodes.find(stream.ap);
  const auto b = nodes.find(stream.mp);
  if (a == nodes.end() || b == nodes.end()) {
    throw DataError("geometry has no endpoints for stream " + stream.str());
  }
  return Segment{a->second, b->second};
}

SiteGeometry load_geometry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open geometry file " + path.string());
  SiteGeometry geo;
  try {
    const json doc = json::parse(in);
    for (const auto& [name, xy] : doc.at("nodes").items()) {
      geo.nodes[name] = Point{xy.at(0).get<double>(), xy.at(1).get<double>()};
    }
    for (const auto& s : doc.at("streams")) geo.streams.push_back(StreamId::parse(s.get<std::string>()));
    geo.v_max = doc.at("v_max").get<double>();
    const auto& b = doc.at("bounds");
    geo.bounds = Rect{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                      b.at(3).get<double>()};
  } catch (const json::exception& e) {
    throw ConfigError("geometry file " + path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw ConfigError("geometry file " + path.string() + ": " + e.what());
  }
  geo.validate();
  return geo;
}

// ---------------------------------------------------------------------------
// tick alignment

TickGrid align(const RssTrace& trace, double rate_hz) {
  if (!(rate_hz > 0.0)) throw ConfigError("rate_hz must be > 0");
  TickGrid grid;
  grid.rate_hz = rate_hz;
  grid.streams = trace.streams();
  if (trace.total_samples() == 0) return grid;
  const auto [lo, hi] = trace.time_range();
  grid.t0 = lo;
  grid.ticks = static_cast<std::size_t>(std::llround((hi - lo) * rate_hz)) + 1;

  grid.values.assign(grid.streams.size(), std::vector<double>(grid.ticks, 0.0));
  grid.flags.assign(grid.streams.size(),
                    std::vector<TickGrid::Flag>(grid.ticks, TickGrid::Flag::invalid));
  for (std::size_t j = 0; j < grid.streams.size(); ++j) {
    std::vector<bool> seen(grid.ticks, false);
    auto& vals = grid.values[j];
    for (const auto& s : trace.samples(grid.streams[j])) {
      const auto tick = static_cast<std::size_t>(std::llround((s.t - lo) * rate_hz));
      vals[tick] = s.rss;  // a later sample on the same tick wins
      seen[tick] = true;
    }
    auto& flags = grid.flags[j];
    bool started = false;
    std::size_t misses = 0;
    double last = 0.0;
    for (std::size_t i = 0; i < grid.ticks; ++i) {
      if (seen[i]) {
        started = true;
        misses = 0;
        last = vals[i];
        flags[i] = TickGrid::Flag::observed;
      } else if (started) {
        ++misses;
        vals[i] = last;
        flags[i] = misses > TickGrid::kMaxCarry ? TickGrid::Flag::invalid : TickGrid::Flag::filled;
      }
    }
  }
  return grid;
}

}  // namespace rasid
