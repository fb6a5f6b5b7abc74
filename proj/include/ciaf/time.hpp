#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace ciaf {

/// UTC instant at millisecond resolution.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Minute = std::chrono::sys_time<std::chrono::minutes>;

/// Accepts RFC 3339 (`2025-01-01T00:00:00Z`, fractional seconds, numeric
/// offsets) and the Azure portal export form `M/D/YYYY, h:mm:ss.fff AM/PM`.
/// Returns nullopt on anything else. Offsets are normalized to UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SSZ`, with `.mmm` only when the millisecond part is nonzero.
std::string format_timestamp(Timestamp ts);
std::string format_minute(Minute m);

inline Minute floor_minute(Timestamp ts) {
  return std::chrono::floor<std::chrono::minutes>(ts);
}

/// Half-open interval [start, end).
struct TimeWindow {
  Timestamp start;
  Timestamp end;

  bool contains(Timestamp t) const { return start <= t && t < end; }
  bool valid() const { return start < end; }
  bool operator==(const TimeWindow&) const = default;
};

/// Builds a window and throws std::invalid_argument unless start < end.
TimeWindow make_window(Timestamp start, Timestamp end);

/// Intersection of two windows; nullopt when they do not overlap.
std::optional<TimeWindow> intersect(const TimeWindow& a, const TimeWindow& b);

std::string format_window(const TimeWindow& w);

}  // namespace ciaf
