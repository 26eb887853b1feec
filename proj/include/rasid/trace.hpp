#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rasid/geometry.hpp"

namespace rasid {

/// One AP -> MP link. Canonical text form is "AP1-MP3".
struct StreamId {
  std::string ap;
  std::string mp;

  static StreamId parse(std::string_view text);
  [[nodiscard]] std::string str() const { return ap + "-" + mp; }

  auto operator<=>(const StreamId&) const = default;
  bool operator==(const StreamId&) const = default;
};

struct RssSample {
  double t = 0.0;    // seconds
  double rss = 0.0;  // dBm
};

/// Time-ordered signal strength samples grouped per stream.
class RssTrace {
 public:
  /// Appends a sample; throws DataError when t does not strictly increase
  /// on the stream or rss is not finite.
  void add(const StreamId& stream, double t, double rss);

  [[nodiscard]] std::vector<StreamId> streams() const;
  [[nodiscard]] std::size_t stream_count() const { return data_.size(); }
  [[nodiscard]] bool has(const StreamId& stream) const { return data_.contains(stream); }
  [[nodiscard]] std::span<const RssSample> samples(const StreamId& stream) const;
  [[nodiscard]] std::size_t total_samples() const;
  [[nodiscard]] bool empty() const { return data_.empty(); }

  /// Earliest and latest timestamp over all streams; {0,0} when empty.
  [[nodiscard]] std::pair<double, double> time_range() const;

  /// Samples with t0 <= t < t1, all streams kept even if they end up empty.
  [[nodiscard]] RssTrace slice(double t0, double t1) const;

  /// Every rss value offset by `db`.
  [[nodiscard]] RssTrace shifted(double db) const;

  /// Mean offset growing linearly in time: rss += rate_db_per_s * (t - t_ref).
  [[nodiscard]] RssTrace drifted(double rate_db_per_s, double t_ref) const;

  bool operator==(const RssTrace&) const;

 private:
  std::map<StreamId, std::vector<RssSample>> data_;
};

/// Reads JSON Lines ({"t","stream","rss"} per line) or CSV with header
/// `t,stream,rss`. Format is chosen by the .csv extension.
RssTrace load_trace(const std::filesystem::path& path);

/// Writes JSON Lines ordered by time, then stream.
void write_trace(const std::filesystem::path& path, const RssTrace& trace);

// ---------------------------------------------------------------------------

struct Window {
  StreamId stream;
  double end_t = 0.0;
  std::vector<double> samples;  // the l most recent rss values, oldest first
};

/// All sliding windows of length l over one stream; n-l+1 of them.
std::vector<Window> windows(const RssTrace& trace, const StreamId& stream, std::size_t l);

// ---------------------------------------------------------------------------

enum class Label { silence, motion };

struct LabelInterval {
  double start = 0.0;
  double end = 0.0;
  Label label = Label::silence;
  std::optional<std::string> loc;  // location tag, used by MLE training
};

/// Ground truth as sorted, non-overlapping half-open intervals [start, end).
class LabelTrack {
 public:
  LabelTrack() = default;
  explicit LabelTrack(std::vector<LabelInterval> intervals);

  [[nodiscard]] const std::vector<LabelInterval>& intervals() const { return intervals_; }
  [[nodiscard]] const LabelInterval* find(double t) const;
  [[nodiscard]] std::optional<Label> label_at(double t) const;
  [[nodiscard]] std::vector<LabelInterval> motion_intervals() const;

  /// True when no motion interval intersects [t0, t1).
  [[nodiscard]] bool all_silence(double t0, double t1) const;

  bool operator==(const LabelTrack&) const = default;

 private:
  std::vector<LabelInterval> intervals_;
};

bool operator==(const LabelInterval& a, const LabelInterval& b);

LabelTrack load_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const LabelTrack& labels);

// ---------------------------------------------------------------------------

struct SiteGeometry {
  std::map<std::string, Point> nodes;
  std::vector<StreamId> streams;
  double v_max = 1.5;  // m/s
  Rect bounds;

  /// Throws ConfigError when a stream endpoint is unknown or v_max <= 0.
  void validate() const;
  [[nodiscard]] Segment segment(const StreamId& stream) const;
};

SiteGeometry load_geometry(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

/// Per-tick view of a trace on a uniform grid t = t0 + i / rate_hz.
///
/// A tick with no sample repeats the previous value and is flagged `filled`;
/// more than kMaxCarry consecutive fills mark the tick `invalid`, as are ticks
/// before the stream's first sample.
struct TickGrid {
  enum class Flag : std::uint8_t { observed, filled, invalid };
  static constexpr std::size_t kMaxCarry = 5;

  double t0 = 0.0;
  double rate_hz = 1.0;
  std::size_t ticks = 0;
  std::vector<StreamId> streams;
  std::vector<std::vector<double>> values;  // [stream][tick]
  std::vector<std::vector<Flag>> flags;     // [stream][tick]

  [[nodiscard]] double time(std::size_t tick) const {
    return t0 + static_cast<double>(tick) / rate_hz;
  }
};

/// Aligns every stream onto the shared tick grid spanning the trace.
TickGrid align(const RssTrace& trace, double rate_hz);

}  // namespace rasid
