#include "ciaf/synthlab.hpp"

#include "ciaf/csv.hpp"
#include "ciaf/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ciaf {

namespace {

// mt19937_64 is fully specified by the standard; the distributions are not,
// so draws are built from raw engine output to keep streams identical across
// standard libraries.
class Draws {
 public:
  explicit Draws(std::uint64_t seed) : engine_(seed) {}

  // Uniform in (0, 1].
  double uniform() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  double gaussian() {
    if (spare_) {
      double z = *spare_;
      spare_.reset();
      return z;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

using std::chrono::milliseconds;
using std::chrono::minutes;

void add_events(std::vector<EventRecord>& out, const GeneratorConfig& cfg, int minute, const EventLevel& level,
                int count, std::int64_t event_id, const std::string& message, int slot_offset_ms) {
  for (int i = 0; i < count; ++i) {
    EventRecord e;
    e.timestamp = cfg.start + minutes{minute} + milliseconds{slot_offset_ms + (60'000 * i) / std::max(count, 1)};
    e.level = level;
    e.computer = cfg.computer;
    e.event_id = event_id;
    e.message = message;
    out.push_back(std::move(e));
  }
}

}  // namespace

std::vector<CounterSpec> default_counters() {
  return {
      {"Available Bytes", "", "Memory", 4.2e9, 1.5e8},
      {"Committed Bytes", "", "Memory", 2.6e9, 8.0e7},
      {"Working Set", "_Total", "Process", 1.9e9, 6.0e7},
      {"Working Set - Private", "_Total", "Process", 9.0e8, 4.0e7},
  };
}

GeneratorConfig default_generator_config(std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.counters = default_counters();
  return cfg;
}

void validate(const GeneratorConfig& config) {
  if (config.duration_minutes < 1) throw std::invalid_argument("duration_minutes must be >= 1");
  if (config.samples_per_minute < 1) throw std::invalid_argument("samples_per_minute must be >= 1");
  if (!(config.noise_fraction >= 0.0 && config.noise_fraction < 1.0)) {
    throw std::invalid_argument("noise_fraction must be in [0, 1)");
  }
  if (config.information_per_minute < 0 || config.warnings_per_minute < 0) {
    throw std::invalid_argument("event rates must be >= 0");
  }
  for (const auto& c : config.counters) {
    if (!(c.baseline_std >= 0.0) || !std::isfinite(c.baseline_mean) || !std::isfinite(c.baseline_std)) {
      throw std::invalid_argument("counter '" + c.counter_name + "' needs finite mean and std >= 0");
    }
  }
}

SyntheticStreams generate(const GeneratorConfig& config) {
  validate(config);
  SyntheticStreams s;
  s.config = config;
  Draws draws(config.seed);

  const int spm = config.samples_per_minute;
  s.perf.reserve(static_cast<std::size_t>(config.duration_minutes) * spm * config.counters.size());
  for (int m = 0; m < config.duration_minutes; ++m) {
    for (int k = 0; k < spm; ++k) {
      const Timestamp ts = config.start + minutes{m} + milliseconds{(60'000 * k) / spm};
      for (const auto& c : config.counters) {
        double v = c.baseline_mean + c.baseline_std * draws.gaussian();
        if (draws.uniform() <= config.noise_fraction) {
          v += draws.uniform() <= 0.5 ? c.baseline_std : -c.baseline_std;
        }
        s.perf.push_back(PerfRecord{ts, config.computer, c.object_name, c.counter_name, c.instance_name, v});
      }
    }
  }

  const EventLevel info("Information");
  const EventLevel warning("Warning");
  for (int m = 0; m < config.duration_minutes; ++m) {
    add_events(s.events, config, m, info, config.information_per_minute, 7036,
               "The service entered the running state.", 500);
    add_events(s.events, config, m, warning, config.warnings_per_minute, 10016,
               "Application-specific permission settings do not grant Local Activation permission.", 1500);
  }
  std::stable_sort(s.events.begin(), s.events.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.timestamp < b.timestamp; });
  return s;
}

std::pair<SyntheticStreams, GroundTruth> inject_attack(SyntheticStreams streams, const AttackProfile& profile) {
  const auto& cfg = streams.config;
  if (profile.window_start_minute < 0 || profile.window_end_minute > cfg.duration_minutes ||
      profile.window_start_minute >= profile.window_end_minute) {
    throw WindowOutOfRange("attack window [" + std::to_string(profile.window_start_minute) + ", " +
                           std::to_string(profile.window_end_minute) + ") is outside the " +
                           std::to_string(cfg.duration_minutes) + "-minute stream");
  }
  const TimeWindow window{cfg.start + minutes{profile.window_start_minute},
                          cfg.start + minutes{profile.window_end_minute}};

  for (auto& r : streams.perf) {
    if (!window.contains(r.timestamp)) continue;
    for (const auto& shift : profile.shifts) {
      if (shift.counter_name != r.counter_name) continue;
      auto spec = std::find_if(cfg.counters.begin(), cfg.counters.end(), [&](const CounterSpec& c) {
        return c.counter_name == r.counter_name && c.instance_name == r.instance_name;
      });
      if (spec != cfg.counters.end()) r.value += shift.delta_sigmas * spec->baseline_std;
    }
  }

  if (profile.event_burst.events_per_minute > 0) {
    for (int m = profile.window_start_minute; m < profile.window_end_minute; ++m) {
      add_events(streams.events, cfg, m, profile.event_burst.level, profile.event_burst.events_per_minute, 4663,
                 "An attempt was made to access an object.", 250);
    }
    std::stable_sort(streams.events.begin(), streams.events.end(),
                     [](const EventRecord& a, const EventRecord& b) { return a.timestamp < b.timestamp; });
  }

  GroundTruth truth;
  for (int m = 0; m < cfg.duration_minutes; ++m) {
    Minute minute = floor_minute(cfg.start + minutes{m});
    truth[minute] = (m >= profile.window_start_minute && m < profile.window_end_minute)
                        ? ClassificationLabel::Malicious
                        : ClassificationLabel::Normal;
  }
  return {std::move(streams), std::move(truth)};
}

AttackProfile parse_profile(std::string_view json_text) {
  auto j = nlohmann::json::parse(json_text.begin(), json_text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorFamily::Input, "attack profile is not a JSON object");
  try {
    AttackProfile p;
    p.name = j.value("name", std::string{});
    p.window_start_minute = j.at("window").at("start_minute").get<int>();
    p.window_end_minute = j.at("window").at("end_minute").get<int>();
    for (const auto& s : j.value("shifts", nlohmann::json::array())) {
      p.shifts.push_back(CounterShift{s.at("counter_name").get<std::string>(), s.at("delta_sigmas").get<double>()});
    }
    if (auto it = j.find("event_burst"); it != j.end()) {
      p.event_burst.level = EventLevel(it->at("level").get<std::string>());
      p.event_burst.events_per_minute = it->at("events_per_minute").get<int>();
      if (p.event_burst.level.kind() != EventLevel::Kind::Warning &&
          p.event_burst.level.kind() != EventLevel::Kind::Error) {
        throw Error(ErrorFamily::Input, "event burst level must be Warning or Error");
      }
    }
    if (auto it = j.find("notes"); it != j.end()) {
      if (it->is_array()) {
        for (const auto& line : *it) p.notes += line.get<std::string>() + "\n";
      } else {
        p.notes = it->get<std::string>();
      }
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorFamily::Input, std::string("invalid attack profile: ") + e.what());
  }
}

AttackProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorFamily::Input, "cannot open attack profile: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_profile(ss.str());
}

AttackProfile default_ransomware_profile() {
  AttackProfile p;
  p.name = "ransomware";
  p.window_start_minute = 20;
  p.window_end_minute = 30;
  p.shifts = {{"Working Set", 3.0}, {"Working Set - Private", 3.0}, {"Committed Bytes", 3.0}};
  p.event_burst = EventBurst{EventLevel("Warning"), 50};
  return p;
}

void write_labels(std::ostream& out, const GroundTruth& truth) {
  csv::write_row(out, {"minute", "label"});
  for (const auto& [minute, label] : truth) csv::write_row(out, {format_minute(minute), std::string(to_string(label))});
}

}  // namespace ciaf
