#include "ciaf/ingestion.hpp"

#include "ciaf/csv.hpp"
#include "ciaf/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

namespace ciaf {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string canonical_column(std::string_view name) {
  name = trim(name);
  // Strip a UTF-8 BOM left on the first header cell by some exporters.
  if (name.substr(0, 3) == "\xEF\xBB\xBF") name.remove_prefix(3);
  if (name == "TimeGenerated [UTC]") return "TimeGenerated";
  return std::string(name);
}

class Header {
 public:
  explicit Header(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) index_.emplace(canonical_column(fields[i]), i);
  }

  std::size_t require(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw MissingColumn(name);
    return it->second;
  }

  std::optional<std::size_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::size_t> index_;
};

const std::string& cell(const csv::Row& row, std::size_t idx) {
  if (idx >= row.fields.size()) {
    throw FormatError(row.line, "expected at least " + std::to_string(idx + 1) + " fields, got " +
                                    std::to_string(row.fields.size()));
  }
  return row.fields[idx];
}

Timestamp timestamp_or_throw(std::string_view text, std::size_t line) {
  auto ts = parse_timestamp(text);
  if (!ts) throw FormatError(line, "malformed TimeGenerated '" + std::string(text) + "'");
  return *ts;
}

double value_or_throw(std::string_view text, std::size_t line, const char* column) {
  std::string_view t = trim(text);
  double v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || p != t.data() + t.size()) {
    throw FormatError(line, std::string("non-numeric ") + column + " '" + std::string(text) + "'");
  }
  if (!std::isfinite(v)) throw FormatError(line, std::string("non-finite ") + column);
  return v;
}

std::int64_t integer_or_throw(std::string_view text, std::size_t line, const char* column) {
  std::string_view t = trim(text);
  if (t.empty()) return 0;
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size()) {
    throw FormatError(line, std::string("non-integer ") + column + " '" + std::string(text) + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

// Iterates non-blank JSON lines, handing each parsed object and its line number.
template <typename F>
void for_each_json_line(std::istream& in, F&& on_object) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(n, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw FormatError(n, "expected a JSON object");
    on_object(j, n, line);
  }
}

std::string json_string(const json& j, const char* key, std::size_t line, bool required) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (required) throw FormatError(line, std::string("missing field ") + key);
    return {};
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number()) return it->dump();
  throw FormatError(line, std::string("field ") + key + " must be a string");
}

double json_number(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(line, std::string("missing field ") + key);
  if (it->is_number()) {
    double v = it->get<double>();
    if (!std::isfinite(v)) throw FormatError(line, std::string("non-finite ") + key);
    return v;
  }
  if (it->is_string()) return value_or_throw(it->get_ref<const std::string&>(), line, key);
  throw FormatError(line, std::string("non-numeric ") + key);
}

std::string identity_of(const json& j) {
  auto it = j.find("userIdentity");
  if (it == j.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  if (it->is_object()) {
    for (const char* key : {"arn", "userName", "principalId", "type"}) {
      auto f = it->find(key);
      if (f != it->end() && f->is_string()) return f->get<std::string>();
    }
  }
  return it->dump();
}

}  // namespace

std::optional<InputFormat> parse_format(std::string_view text) {
  if (text == "csv") return InputFormat::Csv;
  if (text == "jsonl" || text == "json_lines" || text == "ndjson") return InputFormat::JsonLines;
  return std::nullopt;
}

// Known levels match case-insensitively; the name is kept as written.
EventLevel::EventLevel(std::string_view name) : name_(trim(name)) {
  std::string folded = name_;
  std::transform(folded.begin(), folded.end(), folded.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (folded == "information") kind_ = Kind::Information;
  else if (folded == "warning") kind_ = Kind::Warning;
  else if (folded == "error") kind_ = Kind::Error;
  else if (folded == "critical") kind_ = Kind::Critical;
  else kind_ = Kind::Other;
}

const std::vector<std::string_view>& known_counters() {
  static const std::vector<std::string_view> kCounters = {
      "Thread Count", "% Free Space", "Working Set - Private", "Processor Frequency",
      "Packets Received Errors", "Packets Outbound Errors", "Working Set", "Free Megabytes",
      "Pool Nonpaged Bytes", "Pool Paged Bytes", "Available Bytes", "% Committed Bytes In Use",
      "Processor Queue Length", "Processes", "Committed Bytes", "Handle Count", "Cache Bytes",
      "System Up Time", "Avg. Disk Write Queue Length", "Avg. Disk Queue Length", "Disk Writes/sec",
      "% User Time", "Disk Transfers/sec", "Disk Reads/sec", "Avg. Disk Read Queue Length",
      "Context Switches/sec", "% Privileged Time", "Avg. Disk sec/Read", "% Processor Time",
      "Bytes Sent/sec", "Bytes Received/sec", "Packets/sec", "Bytes Total/sec",
      "Avg. Disk sec/Transfer", "Packets Sent/sec", "Disk Bytes/sec", "Disk Read Bytes/sec",
      "% Idle Time", "% Disk Write Time",
  };
  return kCounters;
}

PerfParseResult parse_perf(std::istream& in, InputFormat format) {
  PerfParseResult result;
  if (format == InputFormat::Csv) {
    csv::Reader reader(in);
    auto header_row = reader.next();
    if (!header_row) throw MissingColumn("TimeGenerated");
    Header header(header_row->fields);
    const std::size_t c_time = header.require("TimeGenerated");
    const std::size_t c_computer = header.require("Computer");
    const std::size_t c_object = header.require("ObjectName");
    const std::size_t c_counter = header.require("CounterName");
    const std::size_t c_instance = header.require("InstanceName");
    const std::size_t c_value = header.require("CounterValue");
    while (auto row = reader.next()) {
      PerfRecord r;
      r.timestamp = timestamp_or_throw(cell(*row, c_time), row->line);
      r.computer = cell(*row, c_computer);
      r.object_name = cell(*row, c_object);
      r.counter_name = cell(*row, c_counter);
      r.instance_name = cell(*row, c_instance);
      r.value = value_or_throw(cell(*row, c_value), row->line, "CounterValue");
      result.records.push_back(std::move(r));
    }
  } else {
    for_each_json_line(in, [&](const json& j, std::size_t line, const std::string&) {
      PerfRecord r;
      r.timestamp = timestamp_or_throw(json_string(j, "TimeGenerated", line, true), line);
      r.computer = json_string(j, "Computer", line, false);
      r.object_name = json_string(j, "ObjectName", line, false);
      r.counter_name = json_string(j, "CounterName", line, true);
      r.instance_name = json_string(j, "InstanceName", line, false);
      r.value = json_number(j, "CounterValue", line);
      result.records.push_back(std::move(r));
    });
  }

  const auto& known = known_counters();
  std::set<std::string> unknown;
  for (const auto& r : result.records) {
    if (std::find(known.begin(), known.end(), r.counter_name) == known.end()) unknown.insert(r.counter_name);
  }
  result.unrecognized_counters.assign(unknown.begin(), unknown.end());
  return result;
}

std::vector<EventRecord> parse_events(std::istream& in, InputFormat format) {
  std::vector<EventRecord> out;
  if (format == InputFormat::Csv) {
    csv::Reader reader(in);
    auto header_row = reader.next();
    if (!header_row) throw MissingColumn("TimeGenerated");
    Header header(header_row->fields);
    const std::size_t c_time = header.require("TimeGenerated");
    const std::size_t c_level = header.require("EventLevelName");
    auto c_computer = header.find("Computer");
    auto c_id = header.find("EventID");
    auto c_message = header.find("Message");
    if (!c_message) c_message = header.find("RenderedDescription");
    while (auto row = reader.next()) {
      EventRecord r;
      r.timestamp = timestamp_or_throw(cell(*row, c_time), row->line);
      r.level = EventLevel(cell(*row, c_level));
      if (c_computer) r.computer = cell(*row, *c_computer);
      if (c_id) r.event_id = integer_or_throw(cell(*row, *c_id), row->line, "EventID");
      if (c_message) r.message = cell(*row, *c_message);
      out.push_back(std::move(r));
    }
  } else {
    for_each_json_line(in, [&](const json& j, std::size_t line, const std::string&) {
      EventRecord r;
      r.timestamp = timestamp_or_throw(json_string(j, "TimeGenerated", line, true), line);
      r.level = EventLevel(json_string(j, "EventLevelName", line, true));
      r.computer = json_string(j, "Computer", line, false);
      r.event_id = integer_or_throw(json_string(j, "EventID", line, false), line, "EventID");
      r.message = json_string(j, "Message", line, false);
      if (r.message.empty()) r.message = json_string(j, "RenderedDescription", line, false);
      out.push_back(std::move(r));
    });
  }
  return out;
}

std::vector<CloudEvent> parse_cloudtrail(std::istream& in) {
  std::vector<CloudEvent> out;
  for_each_json_line(in, [&](const json& j, std::size_t line, const std::string& raw) {
    CloudEvent e;
    e.timestamp = timestamp_or_throw(json_string(j, "eventTime", line, true), line);
    e.event_name = json_string(j, "eventName", line, true);
    e.event_source = json_string(j, "eventSource", line, false);
    e.user_identity = identity_of(j);
    e.raw = raw;
    if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) throw FormatError(line, "label must be a string");
      auto label = parse_label(it->get<std::string>());
      if (!label) throw FormatError(line, "unknown label '" + it->get<std::string>() + "'");
      e.label = label;
    }
    out.push_back(std::move(e));
  });
  return out;
}

void write_perf(std::ostream& out, std::span<const PerfRecord> records, InputFormat format) {
  if (format == InputFormat::Csv) {
    csv::write_row(out, {"TimeGenerated", "Computer", "ObjectName", "CounterName", "InstanceName", "CounterValue"});
    for (const auto& r : records) {
      csv::write_row(out, {format_timestamp(r.timestamp), r.computer, r.object_name, r.counter_name,
                           r.instance_name, format_double(r.value)});
    }
    return;
  }
  for (const auto& r : records) {
    json j{{"TimeGenerated", format_timestamp(r.timestamp)},
           {"Computer", r.computer},
           {"ObjectName", r.object_name},
           {"CounterName", r.counter_name},
           {"InstanceName", r.instance_name},
           {"CounterValue", r.value}};
    out << j.dump() << '\n';
  }
}

void write_events(std::ostream& out, std::span<const EventRecord> records, InputFormat format) {
  if (format == InputFormat::Csv) {
    csv::write_row(out, {"TimeGenerated", "EventLevelName", "Computer", "EventID", "Message"});
    for (const auto& r : records) {
      csv::write_row(out, {format_timestamp(r.timestamp), r.level.name(), r.computer,
                           std::to_string(r.event_id), r.message});
    }
    return;
  }
  for (const auto& r : records) {
    json j{{"TimeGenerated", format_timestamp(r.timestamp)},
           {"EventLevelName", r.level.name()},
           {"Computer", r.computer},
           {"EventID", r.event_id},
           {"Message", r.message}};
    out << j.dump() << '\n';
  }
}

void write_cloudtrail(std::ostream& out, std::span<const CloudEvent> events) {
  for (const auto& e : events) out << e.raw << '\n';
}

}  // namespace ciaf
