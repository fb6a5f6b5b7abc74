#include "ciaf/pipeline.hpp"

#include "ciaf/csv.hpp"
#include "ciaf/digest.hpp"
#include "ciaf/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace ciaf {

using nlohmann::json;

namespace {

constexpr const char* kPhaseNames[] = {
    "",
    "identification of event",
    "identification of evidence",
    "evidence collection",
    "analysis",
    "interpretation",
    "presentation",
};

template <typename F>
auto in_phase(int phase, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const PhaseError&) {
    throw;
  } catch (const Error& e) {
    throw PhaseError(phase, kPhaseNames[phase], e);
  } catch (const std::invalid_argument& e) {
    throw PhaseError(phase, kPhaseNames[phase], Error(ErrorFamily::Input, e.what()));
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorFamily::Input, "cannot open input file: " + path.string());
  return in;
}

std::string now_utc() {
  return format_timestamp(std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now()));
}

std::string_view format_name(InputFormat f) { return f == InputFormat::Csv ? "csv" : "jsonl"; }

std::string describe_selector(const std::optional<FeatureSelector>& sel) {
  if (!sel) return "scenario required features";
  if (const auto* top = std::get_if<TopK>(&*sel)) return "top_k(" + std::to_string(top->k) + ")";
  const auto& keys = std::get<Explicit>(*sel).keys;
  std::string out = "explicit(";
  for (std::size_t i = 0; i < keys.size(); ++i) out += (i ? ", " : "") + keys[i];
  return out + ")";
}

// ---- JSON helpers ----

json window_json(const std::optional<TimeWindow>& w) {
  if (!w) return nullptr;
  return {{"start", format_timestamp(w->start)}, {"end", format_timestamp(w->end)}};
}

std::optional<TimeWindow> window_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  auto s = parse_timestamp(j.at("start").get<std::string>());
  auto e = parse_timestamp(j.at("end").get<std::string>());
  if (!s || !e) throw Error(ErrorFamily::Input, "report has a malformed window");
  return TimeWindow{*s, *e};
}

Minute minute_from(const json& j) {
  auto ts = parse_timestamp(j.get<std::string>());
  if (!ts) throw Error(ErrorFamily::Input, "report has a malformed minute");
  return floor_minute(*ts);
}

ClassificationLabel label_from(const json& j) {
  auto l = parse_label(j.get<std::string>());
  if (!l) throw Error(ErrorFamily::Input, "report has an unknown label");
  return *l;
}

json report_json(const ForensicReport& r) {
  json j;
  j["tool_version"] = r.tool_version;
  j["generated_at"] = r.generated_at;

  json phases = json::array();
  for (const auto& p : r.phases) {
    phases.push_back({{"number", p.number}, {"name", p.name}, {"ran", p.ran}, {"detail", p.detail}});
  }
  j["phases"] = phases;

  json flagged = json::array();
  for (const auto& w : r.flagged_windows) flagged.push_back(window_json(w));
  j["summary"] = {{"flagged_windows", flagged},
                  {"estimated_attack_window", window_json(r.estimated_attack_window)},
                  {"malicious_minutes", r.malicious_minutes},
                  {"analyzed_minutes", r.analysis.size()}};

  json items = json::array();
  for (const auto& e : r.evidence) {
    items.push_back({{"role", e.role}, {"path", e.path}, {"sha256", e.sha256}, {"records", e.records}});
  }
  j["evidence"] = {{"manifest", items},
                   {"window", window_json(r.evidence_window)},
                   {"unrecognized_counters", r.unrecognized_counters}};

  json minutes = json::array();
  for (const auto& m : r.analysis) {
    minutes.push_back({{"minute", format_minute(m.minute)},
                       {"label", std::string(to_string(m.label))},
                       {"likert", m.likert_text}});
  }
  json dropped = json::array();
  for (const auto& d : r.dropped_rows) {
    dropped.push_back({{"minute", format_minute(d.minute)}, {"missing_columns", d.missing_columns}});
  }
  json timeline_rows = json::array();
  for (std::size_t i = 0; i < r.timeline.rows.size(); ++i) {
    json levels = json::array();
    for (const auto& l : r.timeline.cells[i]) levels.push_back(std::string(identifier(l.name())));
    timeline_rows.push_back({{"minute", format_minute(r.timeline.rows[i])}, {"levels", levels}});
  }
  json feature_rows = json::array();
  for (std::size_t i = 0; i < r.features.rows.size(); ++i) {
    json vals = json::array();
    for (const auto& c : r.features.cells[i]) vals.push_back(c ? json(*c) : json(nullptr));
    feature_rows.push_back({{"minute", format_minute(r.features.rows[i])}, {"values", vals}});
  }
  j["analysis"] = {
      {"scenario", r.scenario},
      {"scheme", std::string(to_string(r.scheme))},
      {"selected_features", r.selected_features},
      {"gate",
       {{"outcome", r.gate.outcome},
        {"function_id", r.gate.function_id ? json(*r.gate.function_id) : json(nullptr)},
        {"scenario", r.gate.scenario},
        {"input_digest", r.gate.input_digest},
        {"advisory_markers", r.gate.advisory_markers}}},
      {"minutes", minutes},
      {"dropped_rows", dropped},
      {"timeline", {{"columns", r.timeline.columns}, {"rows", timeline_rows}}},
      {"features", {{"columns", r.features.columns}, {"rows", feature_rows}}},
  };

  json interp;
  interp["estimated_attack_window"] = window_json(r.estimated_attack_window);
  interp["evaluated_minutes"] = r.evaluated_minutes;
  interp["metrics"] = r.metrics ? json::parse(render_report(*r.metrics, ReportFormat::Json)) : json(nullptr);
  j["interpretation"] = interp;

  json echo = json::array();
  for (const auto& [k, v] : r.config_echo) echo.push_back({{"key", k}, {"value", v}});
  j["presentation"] = {{"tool_version", r.tool_version}, {"generated_at", r.generated_at}, {"config", echo}};
  return j;
}

std::string md_window(const std::optional<TimeWindow>& w) { return w ? format_window(*w) : "none"; }

}  // namespace

std::vector<TimeWindow> identify_event(std::span<const EventRecord> events, double sensitivity) {
  if (events.empty()) throw EmptyInput("no events to scan");
  if (!(sensitivity >= 0.0)) throw std::invalid_argument("sensitivity must be >= 0");

  Minute first = floor_minute(events.front().timestamp);
  Minute last = first;
  for (const auto& e : events) {
    first = std::min(first, floor_minute(e.timestamp));
    last = std::max(last, floor_minute(e.timestamp));
  }
  const auto n = static_cast<std::size_t>((last - first).count()) + 1;
  std::vector<double> counts(n, 0.0);
  for (const auto& e : events) {
    if (e.level.is_alerting()) counts[static_cast<std::size_t>((floor_minute(e.timestamp) - first).count())] += 1.0;
  }

  const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double c : counts) ss += (c - mean) * (c - mean);
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  const double threshold = mean + sensitivity * sd;

  std::vector<TimeWindow> windows;
  std::size_t i = 0;
  while (i < n) {
    if (!(counts[i] > threshold)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && counts[j] > threshold) ++j;
    windows.push_back(TimeWindow{Timestamp{first + std::chrono::minutes{i}}, Timestamp{first + std::chrono::minutes{j}}});
    i = j;
  }
  return windows;
}

std::optional<TimeWindow> estimate_attack_window(std::span<const Minute> minutes,
                                                 std::span<const ClassificationLabel> labels) {
  std::optional<TimeWindow> best;
  std::size_t best_len = 0;
  std::size_t i = 0;
  while (i < minutes.size()) {
    if (labels[i] != ClassificationLabel::Malicious) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < minutes.size() && labels[j] == ClassificationLabel::Malicious &&
           minutes[j] == minutes[j - 1] + std::chrono::minutes{1}) {
      ++j;
    }
    if (j - i > best_len) {
      best_len = j - i;
      best = TimeWindow{Timestamp{minutes[i]}, Timestamp{minutes[j - 1] + std::chrono::minutes{1}}};
    }
    i = j;
  }
  return best;
}

LabelFile read_label_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  LabelFile out;
  csv::Reader reader(in);
  bool first = true;
  std::optional<std::size_t> c_minute, c_label;
  while (auto row = reader.next()) {
    if (first) {
      first = false;
      for (std::size_t i = 0; i < row->fields.size(); ++i) {
        if (row->fields[i] == "minute") c_minute = i;
        if (row->fields[i] == "label") c_label = i;
      }
      if (c_minute && c_label) {
        out.keyed = true;
        continue;
      }
    }
    if (out.keyed) {
      if (row->fields.size() <= std::max(*c_minute, *c_label)) throw FormatError(row->line, "short label row");
      auto ts = parse_timestamp(row->fields[*c_minute]);
      if (!ts) throw FormatError(row->line, "malformed minute '" + row->fields[*c_minute] + "'");
      auto label = parse_label(row->fields[*c_label]);
      if (!label) throw FormatError(row->line, "unknown label '" + row->fields[*c_label] + "'");
      out.minutes.push_back(floor_minute(*ts));
      out.labels.push_back(*label);
    } else {
      if (row->fields.size() != 1) throw FormatError(row->line, "expected one label per line");
      auto label = parse_label(row->fields[0]);
      if (!label) throw FormatError(row->line, "unknown label '" + row->fields[0] + "'");
      out.labels.push_back(*label);
    }
  }
  return out;
}

ForensicReport run_pipeline(const PipelineConfig& config) {
  ForensicReport report;
  report.generated_at = now_utc();
  report.scheme = config.scheme;

  const std::string request = config.request.empty() ? "detect " + config.scenario_name : config.request;
  report.config_echo = {
      {"ontology", config.ontology_path.string()},
      {"scenario", config.scenario_name},
      {"request_sha256", sha256_hex(request)},
      {"perf", config.perf_path ? config.perf_path->string() : ""},
      {"perf_format", std::string(format_name(config.perf_format))},
      {"events", config.events_path ? config.events_path->string() : ""},
      {"events_format", std::string(format_name(config.events_format))},
      {"labels", config.labels_path ? config.labels_path->string() : ""},
      {"window", config.window ? format_window(*config.window) : ""},
      {"evidence_window", config.evidence_mode == EvidenceWindowMode::Flagged ? "flagged" : "full"},
      {"baseline_window", config.baseline_window ? format_window(*config.baseline_window) : ""},
      {"scheme", std::string(to_string(config.scheme))},
      {"selector", describe_selector(config.selector)},
      {"backend", std::string(to_string(config.backend.kind))},
      {"endpoint", config.backend.endpoint_url.value_or("")},
      {"parallelism", std::to_string(config.backend.parallelism)},
      {"sensitivity", std::to_string(config.sensitivity)},
  };

  // Phase 1: identification of event.
  std::vector<EventRecord> events;
  in_phase(1, [&] {
    PhaseLog log{1, kPhaseNames[1], false, ""};
    if (!config.events_path) {
      log.detail = "skipped: no event log supplied";
    } else {
      auto in = open_input(*config.events_path);
      events = parse_events(in, config.events_format);
      if (events.empty()) {
        log.detail = "skipped: event log is empty";
      } else {
        report.flagged_windows = identify_event(events, config.sensitivity);
        log.ran = true;
        log.detail = std::to_string(events.size()) + " events scanned, " +
                     std::to_string(report.flagged_windows.size()) + " window(s) flagged";
      }
    }
    report.phases.push_back(log);
  });

  // Phase 2: identification of evidence.
  const OntologyDoc doc = in_phase(2, [&] { return load_ontology(config.ontology_path); });
  std::vector<PerfRecord> perf;
  const AttackScenario& scenario = in_phase(2, [&]() -> const AttackScenario& {
    const AttackScenario& s = lookup_scenario(doc, config.scenario_name);
    report.scenario = s.name;
    if (!config.perf_path) throw Error(ErrorFamily::Input, "no performance counter export supplied");
    auto in = open_input(*config.perf_path);
    auto parsed = parse_perf(in, config.perf_format);
    perf = std::move(parsed.records);
    report.unrecognized_counters = std::move(parsed.unrecognized_counters);
    report.evidence.push_back(EvidenceItem{"ontology", config.ontology_path.string(),
                                           sha256_file(config.ontology_path), doc.scenarios.size()});
    report.evidence.push_back(
        EvidenceItem{"performance counters", config.perf_path->string(), sha256_file(*config.perf_path), perf.size()});
    if (config.events_path) {
      report.evidence.push_back(
          EvidenceItem{"event log", config.events_path->string(), sha256_file(*config.events_path), events.size()});
    }
    if (config.labels_path) {
      report.evidence.push_back(EvidenceItem{"ground truth", config.labels_path->string(),
                                             sha256_file(*config.labels_path), read_label_file(*config.labels_path).labels.size()});
    }
    report.phases.push_back(PhaseLog{2, kPhaseNames[2], true,
                                     "scenario '" + s.name + "', " + std::to_string(report.evidence.size()) +
                                         " evidence file(s) hashed"});
    return s;
  });

  // Phase 3: evidence collection.
  in_phase(3, [&] {
    std::optional<TimeWindow> window = config.window;
    if (!window && config.evidence_mode == EvidenceWindowMode::Flagged && !report.flagged_windows.empty()) {
      window = TimeWindow{report.flagged_windows.front().start, report.flagged_windows.back().end};
    }
    std::string detail;
    if (window) {
      perf = filter_window(perf, *window);
      report.evidence_window = window;
      detail = std::to_string(perf.size()) + " records inside " + format_window(*window);
    } else {
      detail = std::to_string(perf.size()) + " records, full capture";
    }
    if (perf.empty()) throw EmptyInput("no performance records inside the evidence window");
    report.phases.push_back(PhaseLog{3, kPhaseNames[3], true, detail});
  });

  // Phase 4: analysis.
  std::vector<ClassificationLabel> predictions;
  in_phase(4, [&] {
    FeatureMatrix matrix = resample_minutely(perf);
    std::vector<std::string> selected;
    if (config.selector) {
      StatsMap all_stats = compute_stats(matrix);
      selected = select_features(all_stats, *config.selector);
    } else {
      for (const auto& f : scenario.required_features) {
        auto idx = resolve_feature(matrix.columns, f);
        if (!idx) throw UnknownFeature("required feature '" + f + "' not found in the performance data");
        selected.push_back(matrix.columns[*idx]);
      }
    }
    FeatureMatrix chosen = matrix.select(selected);

    StatsMap stats;
    if (config.baseline_window) {
      auto baseline = filter_window(perf, *config.baseline_window);
      if (baseline.empty()) throw EmptyInput("no performance records inside the baseline window", ErrorFamily::Analysis);
      stats = compute_stats(resample_minutely(baseline).select(selected));
    } else {
      stats = compute_stats(chosen);
    }
    LikertMatrix likert = to_likert(chosen, stats, config.scheme);
    if (likert.rows.empty()) throw EmptyInput("every minute has a missing feature value", ErrorFamily::Analysis);

    GateDecision decision = gate(doc, RawUserInput{request, config.attributes});
    if (config.audit_path) {
      AuditSink sink(*config.audit_path);
      sink.append(decision.audit);
    }
    report.gate = GateSummary{std::string(to_string(decision.outcome)), decision.audit.function_id,
                              decision.validated ? decision.validated->scenario_name : "",
                              decision.audit.input_digest, decision.audit.advisory_markers};
    if (decision.outcome == GateOutcome::Rejected) {
      throw Error(ErrorFamily::Gate, "prompt gate rejected the request: " + *decision.reason);
    }
    if (decision.validated->scenario_name != scenario.name) {
      throw Error(ErrorFamily::Gate, "request resolved to scenario '" + decision.validated->scenario_name +
                                         "', not '" + scenario.name + "'");
    }

    std::unique_ptr<ClassifierBackend> backend;
    if (config.backend.kind == BackendKind::Mock) {
      backend = std::make_unique<MockBackend>(scenario.detection_rule, config.backend.parallelism);
    } else {
      backend = std::make_unique<HttpBackend>(config.backend);
    }
    predictions = batch_classify(*backend, *decision.validated, doc.model, likert);

    for (std::size_t i = 0; i < likert.rows.size(); ++i) {
      report.analysis.push_back(MinuteLabel{likert.rows[i], predictions[i], row_to_text(row_view(likert, i))});
    }
    report.selected_features = selected;
    report.dropped_rows = likert.dropped_rows;
    report.timeline = std::move(likert);
    report.features = std::move(chosen);
    report.phases.push_back(PhaseLog{4, kPhaseNames[4], true,
                                     std::to_string(report.analysis.size()) + " minute(s) classified with the " +
                                         std::string(to_string(config.backend.kind)) + " backend"});
  });

  // Phase 5: interpretation.
  in_phase(5, [&] {
    report.estimated_attack_window = estimate_attack_window(report.timeline.rows, predictions);
    report.malicious_minutes =
        static_cast<std::size_t>(std::count(predictions.begin(), predictions.end(), ClassificationLabel::Malicious));
    std::string detail = "estimated attack window " + md_window(report.estimated_attack_window);
    if (config.labels_path) {
      LabelFile truth = read_label_file(*config.labels_path);
      std::vector<ClassificationLabel> t, p;
      if (truth.keyed) {
        std::map<Minute, ClassificationLabel> by_minute;
        for (std::size_t i = 0; i < truth.minutes.size(); ++i) by_minute[truth.minutes[i]] = truth.labels[i];
        for (std::size_t i = 0; i < report.timeline.rows.size(); ++i) {
          auto it = by_minute.find(report.timeline.rows[i]);
          if (it == by_minute.end()) continue;
          t.push_back(it->second);
          p.push_back(predictions[i]);
        }
      } else {
        t = truth.labels;
        p = predictions;
      }
      report.metrics = metrics(confusion(t, p));
      report.evaluated_minutes = t.size();
      detail += "; metrics over " + std::to_string(t.size()) + " labeled minute(s)";
    }
    report.phases.push_back(PhaseLog{5, kPhaseNames[5], true, detail});
  });

  report.phases.push_back(PhaseLog{6, kPhaseNames[6], true, "report assembled"});
  return report;
}

std::string render_forensic_report(const ForensicReport& r, DocumentFormat format) {
  if (format == DocumentFormat::Json) return report_json(r).dump(2) + "\n";

  std::ostringstream md;
  md << "# Forensic Report: " << (r.scenario.empty() ? "unresolved scenario" : r.scenario) << "\n\n";

  md << "## Summary\n\n";
  md << "- Flagged event windows: ";
  if (r.flagged_windows.empty()) md << "none";
  for (std::size_t i = 0; i < r.flagged_windows.size(); ++i) md << (i ? ", " : "") << format_window(r.flagged_windows[i]);
  md << "\n";
  md << "- Malicious minutes: " << r.malicious_minutes << " of " << r.analysis.size() << "\n";
  md << "- Estimated attack window: " << md_window(r.estimated_attack_window) << "\n\n";

  md << "## Evidence\n\n";
  for (const auto& e : r.evidence) {
    md << "- " << e.role << ": `" << e.path << "` sha256 " << e.sha256 << " (" << e.records << " records)\n";
  }
  md << "- Evidence window: " << (r.evidence_window ? format_window(*r.evidence_window) : "full capture") << "\n";
  if (!r.unrecognized_counters.empty()) {
    md << "- Counters outside the known inventory: ";
    for (std::size_t i = 0; i < r.unrecognized_counters.size(); ++i) md << (i ? ", " : "") << r.unrecognized_counters[i];
    md << "\n";
  }
  md << "\n";

  md << "## Analysis\n\n";
  md << "- Scenario: " << r.scenario << " (" << to_string(r.scheme) << "-level Likert scheme)\n";
  md << "- Features: ";
  for (std::size_t i = 0; i < r.selected_features.size(); ++i) md << (i ? ", " : "") << r.selected_features[i];
  md << "\n";
  md << "- Prompt gate: " << r.gate.outcome;
  if (r.gate.function_id) md << " via `" << *r.gate.function_id << "`";
  md << ", input sha256 " << r.gate.input_digest << "\n";
  if (!r.dropped_rows.empty()) md << "- Dropped minutes (missing values): " << r.dropped_rows.size() << "\n";
  md << "\n| Minute | Label | Likert row |\n|---|---|---|\n";
  for (const auto& m : r.analysis) {
    md << "| " << format_minute(m.minute) << " | " << to_string(m.label) << " | " << m.likert_text << " |\n";
  }
  md << "\n";

  md << "## Interpretation\n\n";
  md << "- Estimated attack window: " << md_window(r.estimated_attack_window) << "\n";
  if (r.metrics) {
    md << "- Metrics over " << r.evaluated_minutes << " labeled minute(s):\n\n```\n"
       << render_report(*r.metrics, ReportFormat::Text) << "```\n\n";
  } else {
    md << "- Metrics: no ground truth supplied.\n\n";
  }

  md << "## Presentation\n\n";
  md << "- Tool version: " << r.tool_version << "\n";
  md << "- Generated at: " << r.generated_at << "\n";
  md << "- Phases:\n";
  for (const auto& p : r.phases) {
    md << "  " << p.number << ". " << p.name << ": " << (p.ran ? "ran" : "not run") << " (" << p.detail << ")\n";
  }
  md << "- Configuration:\n";
  for (const auto& [k, v] : r.config_echo) md << "  - " << k << ": " << (v.empty() ? "-" : v) << "\n";
  md << "- Timeline: timeline.csv (Likert levels), features.csv (per-minute means)\n";
  return md.str();
}

ForensicReport parse_forensic_report(std::string_view json_text) {
  json j = json::parse(json_text.begin(), json_text.end(), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorFamily::Input, "report is not valid JSON");
  try {
    ForensicReport r;
    r.tool_version = j.at("tool_version").get<std::string>();
    r.generated_at = j.at("generated_at").get<std::string>();
    for (const auto& p : j.at("phases")) {
      r.phases.push_back(PhaseLog{p.at("number").get<int>(), p.at("name").get<std::string>(), p.at("ran").get<bool>(),
                                  p.at("detail").get<std::string>()});
    }
    const json& summary = j.at("summary");
    for (const auto& w : summary.at("flagged_windows")) r.flagged_windows.push_back(*window_from(w));
    r.estimated_attack_window = window_from(summary.at("estimated_attack_window"));
    r.malicious_minutes = summary.at("malicious_minutes").get<std::size_t>();

    const json& evidence = j.at("evidence");
    for (const auto& e : evidence.at("manifest")) {
      r.evidence.push_back(EvidenceItem{e.at("role").get<std::string>(), e.at("path").get<std::string>(),
                                        e.at("sha256").get<std::string>(), e.at("records").get<std::size_t>()});
    }
    r.evidence_window = window_from(evidence.at("window"));
    r.unrecognized_counters = evidence.at("unrecognized_counters").get<std::vector<std::string>>();

    const json& analysis = j.at("analysis");
    r.scenario = analysis.at("scenario").get<std::string>();
    auto scheme = parse_scheme(analysis.at("scheme").get<std::string>());
    if (!scheme) throw Error(ErrorFamily::Input, "report has an unknown Likert scheme");
    r.scheme = *scheme;
    r.selected_features = analysis.at("selected_features").get<std::vector<std::string>>();
    const json& g = analysis.at("gate");
    r.gate.outcome = g.at("outcome").get<std::string>();
    if (!g.at("function_id").is_null()) r.gate.function_id = g.at("function_id").get<std::string>();
    r.gate.scenario = g.at("scenario").get<std::string>();
    r.gate.input_digest = g.at("input_digest").get<std::string>();
    r.gate.advisory_markers = g.at("advisory_markers").get<std::vector<std::string>>();
    for (const auto& m : analysis.at("minutes")) {
      r.analysis.push_back(MinuteLabel{minute_from(m.at("minute")), label_from(m.at("label")),
                                       m.at("likert").get<std::string>()});
    }
    for (const auto& d : analysis.at("dropped_rows")) {
      r.dropped_rows.push_back(
          DroppedRow{minute_from(d.at("minute")), d.at("missing_columns").get<std::vector<std::string>>()});
    }
    const json& tl = analysis.at("timeline");
    r.timeline.scheme = r.scheme;
    r.timeline.columns = tl.at("columns").get<std::vector<std::string>>();
    for (const auto& row : tl.at("rows")) {
      r.timeline.rows.push_back(minute_from(row.at("minute")));
      std::vector<LikertLevel> levels;
      for (const auto& l : row.at("levels")) {
        auto name = parse_likert_name(l.get<std::string>());
        auto rank = name ? rank_in(*name, r.scheme) : std::nullopt;
        if (!rank) throw Error(ErrorFamily::Input, "report has an invalid Likert level");
        levels.push_back(LikertLevel{r.scheme, *rank});
      }
      r.timeline.cells.push_back(std::move(levels));
    }
    r.timeline.dropped_rows = r.dropped_rows;
    const json& ft = analysis.at("features");
    r.features.columns = ft.at("columns").get<std::vector<std::string>>();
    for (const auto& row : ft.at("rows")) {
      r.features.rows.push_back(minute_from(row.at("minute")));
      std::vector<std::optional<double>> vals;
      for (const auto& v : row.at("values")) vals.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
      r.features.cells.push_back(std::move(vals));
    }

    const json& interp = j.at("interpretation");
    r.evaluated_minutes = interp.at("evaluated_minutes").get<std::size_t>();
    if (!interp.at("metrics").is_null()) {
      const json& rows = interp.at("metrics").at("confusion_matrix").at("rows");
      ConfusionMatrix cm;
      for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t p = 0; p < 2; ++p) cm.cells[a][p] = rows.at(a).at(p).get<std::size_t>();
      }
      r.metrics = metrics(cm);
    }
    for (const auto& kv : j.at("presentation").at("config")) {
      r.config_echo.emplace_back(kv.at("key").get<std::string>(), kv.at("value").get<std::string>());
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorFamily::Input, std::string("report JSON is incomplete: ") + e.what());
  }
}

void write_report_bundle(const ForensicReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto open = [&](const char* name) {
    std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorFamily::Input, "cannot write " + (out_dir / name).string());
    return out;
  };
  open("report.json") << render_forensic_report(report, DocumentFormat::Json);
  open("report.md") << render_forensic_report(report, DocumentFormat::Markdown);
  {
    auto out = open("timeline.csv");
    write_likert_csv(out, report.timeline);
  }
  {
    auto out = open("features.csv");
    write_matrix_csv(out, report.features);
  }
  auto out = open("predictions.csv");
  csv::write_row(out, {"minute", "label"});
  for (const auto& m : report.analysis) csv::write_row(out, {format_minute(m.minute), std::string(to_string(m.label))});
}

}  // namespace ciaf
