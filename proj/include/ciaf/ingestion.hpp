#pragma once

#include "ciaf/label.hpp"
#include "ciaf/time.hpp"

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ciaf {

enum class InputFormat { Csv, JsonLines };

std::optional<InputFormat> parse_format(std::string_view text);

/// One Azure `Perf` row.
struct PerfRecord {
  Timestamp timestamp;
  std::string computer;
  std::string object_name;
  std::string counter_name;
  std::string instance_name;
  double value = 0.0;

  bool operator==(const PerfRecord&) const = default;
};

/// Open enumeration over EventLevelName; unrecognized names are kept verbatim.
class EventLevel {
 public:
  enum class Kind { Information, Warning, Error, Critical, Other };

  EventLevel() = default;
  explicit EventLevel(std::string_view name);

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  /// Warning, Error, or Critical.
  bool is_alerting() const noexcept {
    return kind_ == Kind::Warning || kind_ == Kind::Error || kind_ == Kind::Critical;
  }

  bool operator==(const EventLevel&) const = default;

 private:
  Kind kind_ = Kind::Information;
  std::string name_ = "Information";
};

/// One Azure `Event` row. Only TimeGenerated and EventLevelName are required.
struct EventRecord {
  Timestamp timestamp;
  EventLevel level;
  std::string computer;
  std::int64_t event_id = 0;
  std::string message;

  bool operator==(const EventRecord&) const = default;
};

/// One CloudTrail-style event. `raw` keeps the original line for evidence.
struct CloudEvent {
  Timestamp timestamp;
  std::string event_name;
  std::string event_source;
  std::string user_identity;
  std::string raw;
  std::optional<ClassificationLabel> label;

  bool operator==(const CloudEvent&) const = default;
};

struct PerfParseResult {
  std::vector<PerfRecord> records;
  /// Distinct counter names outside the known Azure inventory, sorted.
  std::vector<std::string> unrecognized_counters;
};

/// Counter names monitored in the reference Azure deployment. Advisory only.
const std::vector<std::string_view>& known_counters();

/// CSV needs the header TimeGenerated, Computer, ObjectName, CounterName,
/// InstanceName, CounterValue in any order ("TimeGenerated [UTC]" also accepted).
/// JSON Lines objects use the same keys.
PerfParseResult parse_perf(std::istream& in, InputFormat format);
std::vector<EventRecord> parse_events(std::istream& in, InputFormat format);
std::vector<CloudEvent> parse_cloudtrail(std::istream& in);

void write_perf(std::ostream& out, std::span<const PerfRecord> records, InputFormat format);
void write_events(std::ostream& out, std::span<const EventRecord> records, InputFormat format);
void write_cloudtrail(std::ostream& out, std::span<const CloudEvent> events);

/// Keeps records with window.start <= timestamp < window.end, in order.
template <typename Record>
std::vector<Record> filter_window(std::span<const Record> records, const TimeWindow& window) {
  std::vector<Record> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [&](const Record& r) { return window.contains(r.timestamp); });
  return out;
}

template <typename Record>
std::vector<Record> filter_window(const std::vector<Record>& records, const TimeWindow& window) {
  return filter_window(std::span<const Record>(records), window);
}

}  // namespace ciaf
