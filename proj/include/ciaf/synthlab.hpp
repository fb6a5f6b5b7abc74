#pragma once

#include "ciaf/ingestion.hpp"
#include "ciaf/label.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace ciaf {

struct CounterSpec {
  std::string counter_name;
  std::string instance_name;
  std::string object_name;
  double baseline_mean = 0.0;
  double baseline_std = 0.0;
};

struct GeneratorConfig {
  std::uint64_t seed = 42;
  int duration_minutes = 35;
  Timestamp start = Timestamp{std::chrono::sys_days{std::chrono::year{2025} / 1 / 1}};
  std::string computer = "vm01";
  std::vector<CounterSpec> counters;
  int samples_per_minute = 12;
  double noise_fraction = 0.05;
  /// Background event rates per minute.
  int information_per_minute = 2;
  int warnings_per_minute = 1;
};

/// Memory counters behind the bundled ransomware rule, with plausible
/// byte-scale baselines.
std::vector<CounterSpec> default_counters();
GeneratorConfig default_generator_config(std::uint64_t seed = 42);

/// Throws std::invalid_argument when a field is out of range.
void validate(const GeneratorConfig& config);

struct CounterShift {
  std::string counter_name;
  double delta_sigmas = 0.0;
};

struct EventBurst {
  EventLevel level{"Warning"};
  int events_per_minute = 0;
};

/// Attack window is given in whole minutes relative to the generator start.
struct AttackProfile {
  std::string name;
  int window_start_minute = 0;
  int window_end_minute = 0;  // exclusive
  std::vector<CounterShift> shifts;
  EventBurst event_burst;
  std::string notes;
};

/// Loads a profile JSON document ({name, window:{start_minute,end_minute},
/// shifts:[{counter_name, delta_sigmas}], event_burst:{level, events_per_minute}, notes}).
AttackProfile load_profile(const std::filesystem::path& path);
AttackProfile parse_profile(std::string_view json_text);
/// The bundled ransomware signature over minutes [20, 30).
AttackProfile default_ransomware_profile();

struct SyntheticStreams {
  GeneratorConfig config;
  std::vector<PerfRecord> perf;
  std::vector<EventRecord> events;
};

/// Per-minute ground truth, one entry for every generated minute.
using GroundTruth = std::map<Minute, ClassificationLabel>;

/// Deterministic: equal configs yield identical streams.
SyntheticStreams generate(const GeneratorConfig& config);

/// Shifts the listed counters inside the window by delta * baseline_std,
/// injects the event burst, and labels minutes. Throws WindowOutOfRange.
std::pair<SyntheticStreams, GroundTruth> inject_attack(SyntheticStreams streams, const AttackProfile& profile);

/// `minute,label` CSV.
void write_labels(std::ostream& out, const GroundTruth& truth);

}  // namespace ciaf
