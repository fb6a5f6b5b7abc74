#pragma once

#include "ciaf/evaluation.hpp"
#include "ciaf/ingestion.hpp"
#include "ciaf/likert.hpp"
#include "ciaf/llm.hpp"
#include "ciaf/ontology.hpp"
#include "ciaf/promptshield.hpp"
#include "ciaf/transform.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ciaf {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Flags maximal runs of minutes whose Warning+Error+Critical count exceeds
/// mean + sensitivity * stddev (sample deviation over every minute between the
/// first and last event). Throws EmptyInput.
std::vector<TimeWindow> identify_event(std::span<const EventRecord> events, double sensitivity = 2.0);

/// Longest run of consecutive Malicious minutes, earliest on ties.
std::optional<TimeWindow> estimate_attack_window(std::span<const Minute> minutes,
                                                 std::span<const ClassificationLabel> labels);

/// Labels read from either a `minute,label` CSV (keyed) or one label per line.
struct LabelFile {
  bool keyed = false;
  std::vector<Minute> minutes;  // filled when keyed
  std::vector<ClassificationLabel> labels;
};

LabelFile read_label_file(const std::filesystem::path& path);

enum class EvidenceWindowMode { Full, Flagged };

struct PipelineConfig {
  std::filesystem::path ontology_path;
  std::string scenario_name = "ransomware";
  /// Analyst request passed through the prompt gate; empty means "detect <scenario>".
  std::string request;
  AttributeValues attributes;

  std::optional<std::filesystem::path> perf_path;
  InputFormat perf_format = InputFormat::Csv;
  std::optional<std::filesystem::path> events_path;
  InputFormat events_format = InputFormat::Csv;
  std::optional<std::filesystem::path> labels_path;

  /// Manual override of the evidence window; wins over `evidence_mode`.
  std::optional<TimeWindow> window;
  EvidenceWindowMode evidence_mode = EvidenceWindowMode::Full;
  /// When set, column statistics come from this clean window instead.
  std::optional<TimeWindow> baseline_window;

  LikertScheme scheme = LikertScheme::Seven;
  /// Defaults to the scenario's required features.
  std::optional<FeatureSelector> selector;
  BackendConfig backend;
  double sensitivity = 2.0;
  std::optional<std::filesystem::path> audit_path;
};

struct PhaseLog {
  int number = 0;
  std::string name;
  bool ran = false;
  std::string detail;
};

struct EvidenceItem {
  std::string role;
  std::string path;
  std::string sha256;
  std::size_t records = 0;
};

struct MinuteLabel {
  Minute minute;
  ClassificationLabel label = ClassificationLabel::Normal;
  std::string likert_text;
};

struct GateSummary {
  std::string outcome;
  std::optional<std::string> function_id;
  std::string scenario;
  std::string input_digest;
  std::vector<std::string> advisory_markers;
};

struct ForensicReport {
  std::string tool_version{kToolVersion};
  std::string generated_at;

  std::vector<PhaseLog> phases;

  // Summary
  std::vector<TimeWindow> flagged_windows;
  std::optional<TimeWindow> estimated_attack_window;
  std::size_t malicious_minutes = 0;

  // Evidence
  std::vector<EvidenceItem> evidence;
  std::optional<TimeWindow> evidence_window;
  std::vector<std::string> unrecognized_counters;

  // Analysis
  std::string scenario;
  LikertScheme scheme = LikertScheme::Seven;
  std::vector<std::string> selected_features;
  GateSummary gate;
  std::vector<MinuteLabel> analysis;
  std::vector<DroppedRow> dropped_rows;
  LikertMatrix timeline;
  FeatureMatrix features;

  // Interpretation
  std::optional<MetricsReport> metrics;
  std::size_t evaluated_minutes = 0;

  // Presentation
  std::vector<std::pair<std::string, std::string>> config_echo;
};

/// Runs the six phases in order. Upstream errors surface as PhaseError.
ForensicReport run_pipeline(const PipelineConfig& config);

enum class DocumentFormat { Markdown, Json };

/// Markdown sections in fixed order: Summary, Evidence, Analysis,
/// Interpretation, Presentation. JSON carries the whole report.
std::string render_forensic_report(const ForensicReport& report, DocumentFormat format);

/// Inverse of the JSON rendering (metrics are recomputed from the stored
/// confusion counts).
ForensicReport parse_forensic_report(std::string_view json_text);

/// Writes report.json, report.md, timeline.csv, features.csv and predictions.csv.
void write_report_bundle(const ForensicReport& report, const std::filesystem::path& out_dir);

}  // namespace ciaf
