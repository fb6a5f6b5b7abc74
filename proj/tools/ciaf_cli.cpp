// ciaf: command-line front end for the forensic pipeline.

#include "ciaf/digest.hpp"
#include "ciaf/errors.hpp"
#include "ciaf/evaluation.hpp"
#include "ciaf/ingestion.hpp"
#include "ciaf/pipeline.hpp"
#include "ciaf/promptshield.hpp"
#include "ciaf/synthlab.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace ciaf;

namespace {

constexpr int kUsageExit = 64;

int exit_code(ErrorFamily family) {
  switch (family) {
    case ErrorFamily::Input: return 10;
    case ErrorFamily::Ontology: return 11;
    case ErrorFamily::Scenario: return 12;
    case ErrorFamily::Gate: return 13;
    case ErrorFamily::Analysis: return 14;
    case ErrorFamily::Backend: return 15;
    case ErrorFamily::Evaluation: return 16;
  }
  return 1;
}

struct Globals {
  std::string ontology;
  std::string scenario = "ransomware";
  std::string scheme = "seven";
  std::string backend;
  std::string out = ".";
  std::string format = "markdown";
};

fs::path data_path(const std::string& rel) { return fs::path(CIAF_DATA_DIR) / rel; }

fs::path ontology_path(const Globals& g) {
  return g.ontology.empty() ? data_path("ontology/default.json") : fs::path(g.ontology);
}

DocumentFormat document_format(const Globals& g) {
  return g.format == "json" ? DocumentFormat::Json : DocumentFormat::Markdown;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorFamily::Input, "cannot open " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorFamily::Input, "cannot write " + p.string());
  return out;
}

TimeWindow window_arg(const std::string& from, const std::string& to, const char* what) {
  auto s = parse_timestamp(from);
  auto e = parse_timestamp(to);
  if (!s || !e) throw Error(ErrorFamily::Input, std::string(what) + " bounds must be RFC 3339 timestamps");
  if (!(*s < *e)) throw Error(ErrorFamily::Input, std::string(what) + " must have start < end");
  return TimeWindow{*s, *e};
}

InputFormat format_arg(const std::string& text) {
  auto f = parse_format(text);
  if (!f) throw Error(ErrorFamily::Input, "unknown input format '" + text + "'");
  return *f;
}

AttributeValues attribute_args(const std::vector<std::string>& pairs) {
  AttributeValues out;
  for (const auto& kv : pairs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorFamily::Input, "attribute '" + kv + "' is not key=value");
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

// ---- gate ----

struct GateArgs {
  std::string audit;
  std::vector<std::string> attrs;
};

int run_gate(const Globals& g, const GateArgs& a) {
  const OntologyDoc doc = load_ontology(ontology_path(g));
  const AttributeValues attrs = attribute_args(a.attrs);
  std::optional<AuditSink> sink;
  if (!a.audit.empty()) sink.emplace(fs::path(a.audit));
  std::string line;
  bool any_rejected = false;
  while (std::getline(std::cin, line)) {
    GateDecision d = gate(doc, RawUserInput{line, attrs});
    if (sink) sink->append(d.audit);
    any_rejected |= d.outcome == GateOutcome::Rejected;
    std::cout << decision_to_json(d) << "\n";
  }
  return any_rejected ? exit_code(ErrorFamily::Gate) : 0;
}

// ---- ingest ----

struct IngestArgs {
  std::string perf, events, cloudtrail, format = "csv", from, to;
};

int run_ingest(const IngestArgs& a) {
  std::optional<TimeWindow> window;
  if (!a.from.empty() || !a.to.empty()) window = window_arg(a.from, a.to, "--from/--to");
  const InputFormat fmt = format_arg(a.format);
  if (a.perf.empty() && a.events.empty() && a.cloudtrail.empty()) {
    throw Error(ErrorFamily::Input, "nothing to ingest: pass --perf, --events or --cloudtrail");
  }
  if (!a.perf.empty()) {
    auto in = open_in(a.perf);
    auto parsed = parse_perf(in, fmt);
    auto records = window ? filter_window(parsed.records, *window) : parsed.records;
    std::map<std::string, std::size_t> per_counter;
    for (const auto& r : records) ++per_counter[r.counter_name + (r.instance_name.empty() ? "" : "|" + r.instance_name)];
    std::cout << "perf " << a.perf << " sha256 " << sha256_file(a.perf) << "\n";
    std::cout << "  records: " << records.size() << "\n";
    for (const auto& [k, n] : per_counter) std::cout << "  " << k << ": " << n << "\n";
    for (const auto& c : parsed.unrecognized_counters) std::cout << "  unrecognized counter: " << c << "\n";
  }
  if (!a.events.empty()) {
    auto in = open_in(a.events);
    auto events = parse_events(in, fmt);
    if (window) events = filter_window(events, *window);
    std::map<std::string, std::size_t> per_level;
    for (const auto& e : events) ++per_level[e.level.name()];
    std::cout << "events " << a.events << " sha256 " << sha256_file(a.events) << "\n";
    std::cout << "  records: " << events.size() << "\n";
    for (const auto& [k, n] : per_level) std::cout << "  " << k << ": " << n << "\n";
  }
  if (!a.cloudtrail.empty()) {
    auto in = open_in(a.cloudtrail);
    auto events = parse_cloudtrail(in);
    if (window) events = filter_window(events, *window);
    std::cout << "cloudtrail " << a.cloudtrail << " sha256 " << sha256_file(a.cloudtrail) << "\n";
    std::cout << "  records: " << events.size() << "\n";
  }
  return 0;
}

// ---- gen ----

struct GenArgs {
  std::uint64_t seed = 42;
  int minutes = 35;
  std::string profile = "ransomware";
  std::string out_perf, out_events, out_labels;
  std::string format = "csv";
  std::optional<int> attack_start, attack_end;
};

AttackProfile resolve_profile(const std::string& name) {
  if (name.find('/') != std::string::npos || name.ends_with(".json")) return load_profile(name);
  const fs::path bundled = data_path("profiles/" + name + ".json");
  if (fs::exists(bundled)) return load_profile(bundled);
  if (name == "ransomware") return default_ransomware_profile();
  throw Error(ErrorFamily::Input, "unknown attack profile '" + name + "'");
}

int run_gen(const Globals& g, const GenArgs& a) {
  GeneratorConfig cfg = default_generator_config(a.seed);
  cfg.duration_minutes = a.minutes;
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorFamily::Input, e.what());
  }
  const InputFormat fmt = format_arg(a.format);
  AttackProfile profile = resolve_profile(a.profile);
  if (a.attack_start) profile.window_start_minute = *a.attack_start;
  if (a.attack_end) profile.window_end_minute = *a.attack_end;
  auto [streams, truth] = inject_attack(generate(cfg), profile);
  const fs::path out(g.out);
  const std::string ext = fmt == InputFormat::Csv ? ".csv" : ".jsonl";
  const fs::path perf = a.out_perf.empty() ? out / ("perf" + ext) : fs::path(a.out_perf);
  const fs::path events = a.out_events.empty() ? out / ("events" + ext) : fs::path(a.out_events);
  const fs::path labels = a.out_labels.empty() ? out / "labels.csv" : fs::path(a.out_labels);
  {
    auto o = open_out(perf);
    write_perf(o, streams.perf, fmt);
  }
  {
    auto o = open_out(events);
    write_events(o, streams.events, fmt);
  }
  {
    auto o = open_out(labels);
    write_labels(o, truth);
  }
  std::cout << "wrote " << streams.perf.size() << " perf records to " << perf.string() << "\n"
            << "wrote " << streams.events.size() << " events to " << events.string() << "\n"
            << "wrote " << truth.size() << " labels to " << labels.string() << "\n";
  return 0;
}

// ---- analyze ----

constexpr const char* kDefaultKeyEnv = "CIAF_API_KEY";

struct AnalyzeArgs {
  std::string perf, events, labels, format = "csv";
  std::string from, to, evidence_window = "full", baseline_from, baseline_to;
  std::vector<std::string> select;
  int top_k = 0;
  std::string endpoint, api_key_env;
  int parallelism = 1;
  double timeout_s = 30.0;
  int max_retries = 3;
  double sensitivity = 2.0;
  std::string request, audit;
  std::vector<std::string> attrs;
};

int run_analyze(const Globals& g, const AnalyzeArgs& a) {
  PipelineConfig cfg;
  cfg.ontology_path = ontology_path(g);
  cfg.scenario_name = g.scenario;
  cfg.request = a.request;
  cfg.attributes = attribute_args(a.attrs);
  if (!a.perf.empty()) cfg.perf_path = a.perf;
  if (!a.events.empty()) cfg.events_path = a.events;
  if (!a.labels.empty()) cfg.labels_path = a.labels;
  cfg.perf_format = cfg.events_format = format_arg(a.format);
  if (!a.from.empty() || !a.to.empty()) cfg.window = window_arg(a.from, a.to, "--from/--to");
  cfg.evidence_mode = a.evidence_window == "flagged" ? EvidenceWindowMode::Flagged : EvidenceWindowMode::Full;
  if (!a.baseline_from.empty() || !a.baseline_to.empty()) {
    cfg.baseline_window = window_arg(a.baseline_from, a.baseline_to, "baseline window");
  }
  auto scheme = parse_scheme(g.scheme);
  if (!scheme) throw Error(ErrorFamily::Input, "unknown scheme '" + g.scheme + "'");
  cfg.scheme = *scheme;
  if (!a.select.empty()) cfg.selector = Explicit{a.select};
  if (a.top_k > 0) cfg.selector = TopK{static_cast<std::size_t>(a.top_k)};

  std::string backend = g.backend;
  if (backend.empty()) {
    backend = load_ontology(cfg.ontology_path).model.backend_kind == BackendKind::Http ? "http" : "mock";
  }
  cfg.backend.kind = backend == "http" ? BackendKind::Http : BackendKind::Mock;
  if (!a.endpoint.empty()) cfg.backend.endpoint_url = a.endpoint;
  // Without an explicit name, the conventional variable is used only if set.
  if (!a.api_key_env.empty()) {
    cfg.backend.api_key_env = a.api_key_env;
  } else if (std::getenv(kDefaultKeyEnv)) {
    cfg.backend.api_key_env = kDefaultKeyEnv;
  }
  cfg.backend.parallelism = a.parallelism;
  cfg.backend.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(a.timeout_s * 1000.0));
  cfg.backend.max_retries = a.max_retries;
  try {
    validate(cfg.backend);
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorFamily::Backend, e.what());
  }
  cfg.sensitivity = a.sensitivity;
  if (!a.audit.empty()) cfg.audit_path = a.audit;

  ForensicReport report = run_pipeline(cfg);
  write_report_bundle(report, g.out);
  std::cout << render_forensic_report(report, document_format(g));
  return 0;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string truth, pred, json_out;
};

int run_evaluate(const Globals& g, const EvaluateArgs& a) {
  LabelFile truth = read_label_file(a.truth);
  LabelFile pred = read_label_file(a.pred);
  std::vector<ClassificationLabel> t, p;
  std::vector<Minute> pred_minutes;
  if (truth.keyed && pred.keyed) {
    std::map<Minute, ClassificationLabel> by_minute;
    for (std::size_t i = 0; i < truth.minutes.size(); ++i) by_minute[truth.minutes[i]] = truth.labels[i];
    for (std::size_t i = 0; i < pred.minutes.size(); ++i) {
      auto it = by_minute.find(pred.minutes[i]);
      if (it == by_minute.end()) continue;
      t.push_back(it->second);
      p.push_back(pred.labels[i]);
    }
    if (t.empty()) throw EmptyInput("truth and predictions share no minutes", ErrorFamily::Evaluation);
  } else {
    t = truth.labels;
    p = pred.labels;
  }
  MetricsReport report = metrics(confusion(t, p));
  const bool as_json = g.format == "json";
  std::cout << render_report(report, as_json ? ReportFormat::Json : ReportFormat::Text);
  if (as_json) std::cout << "\n";
  if (!a.json_out.empty()) open_out(a.json_out) << render_report(report, ReportFormat::Json) << "\n";
  if (pred.keyed && !as_json) {
    auto window = estimate_attack_window(pred.minutes, pred.labels);
    std::cout << "Estimated attack window: " << (window ? format_window(*window) : "none") << "\n";
  }
  return 0;
}

// ---- report ----

int run_report(const Globals& g, const std::string& input) {
  auto in = open_in(input);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::cout << render_forensic_report(parse_forensic_report(ss.str()), document_format(g));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cloud incident analysis: six-phase forensic pipeline with a prompt gate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Globals g;
  app.add_option("--ontology", g.ontology, "Ontology JSON (default: bundled)");
  app.add_option("--scenario", g.scenario, "Attack scenario name")->capture_default_str();
  app.add_option("--scheme", g.scheme, "Likert scheme")->check(CLI::IsMember({"five", "seven"}))->capture_default_str();
  app.add_option("--backend", g.backend, "Classifier backend (default: ontology model)")
      ->check(CLI::IsMember({"mock", "http"}));
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"markdown", "json"}))
      ->capture_default_str();

  GateArgs gate_args;
  auto* gate_cmd = app.add_subcommand("gate", "Validate analyst requests read line by line from stdin");
  gate_cmd->add_option("--audit", gate_args.audit, "Append audit entries (JSON Lines) to this file");
  gate_cmd->add_option("--attr", gate_args.attrs, "Structured attribute key=value");

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse and summarize log exports");
  ingest_cmd->add_option("--perf", ingest_args.perf, "Performance counter export");
  ingest_cmd->add_option("--events", ingest_args.events, "Event log export");
  ingest_cmd->add_option("--cloudtrail", ingest_args.cloudtrail, "CloudTrail-style JSON Lines");
  ingest_cmd->add_option("--input-format", ingest_args.format, "csv or jsonl")->capture_default_str();
  ingest_cmd->add_option("--from", ingest_args.from, "Window start (RFC 3339)");
  ingest_cmd->add_option("--to", ingest_args.to, "Window end, exclusive (RFC 3339)");

  GenArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a labeled synthetic capture");
  gen_cmd->add_option("--seed", gen_args.seed)->capture_default_str();
  gen_cmd->add_option("--minutes", gen_args.minutes)->capture_default_str();
  gen_cmd->add_option("--profile", gen_args.profile, "Bundled profile name or JSON path")->capture_default_str();
  gen_cmd->add_option("--out-perf", gen_args.out_perf);
  gen_cmd->add_option("--out-events", gen_args.out_events);
  gen_cmd->add_option("--out-labels", gen_args.out_labels);
  gen_cmd->add_option("--output-format", gen_args.format, "csv or jsonl")->capture_default_str();
  gen_cmd->add_option("--attack-start", gen_args.attack_start, "Attack window start minute (overrides the profile)");
  gen_cmd->add_option("--attack-end", gen_args.attack_end, "Attack window end minute, exclusive");

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Run the six-phase pipeline and write the report bundle");
  analyze_cmd->add_option("--perf", an.perf, "Performance counter export")->required();
  analyze_cmd->add_option("--events", an.events, "Event log export (enables event identification)");
  analyze_cmd->add_option("--labels", an.labels, "Ground-truth labels for metrics");
  analyze_cmd->add_option("--input-format", an.format, "csv or jsonl")->capture_default_str();
  analyze_cmd->add_option("--from", an.from, "Evidence window start (RFC 3339)");
  analyze_cmd->add_option("--to", an.to, "Evidence window end, exclusive");
  analyze_cmd->add_option("--evidence-window", an.evidence_window, "full or flagged")
      ->check(CLI::IsMember({"full", "flagged"}))
      ->capture_default_str();
  analyze_cmd->add_option("--baseline-from", an.baseline_from, "Clean baseline window start");
  analyze_cmd->add_option("--baseline-to", an.baseline_to, "Clean baseline window end");
  analyze_cmd->add_option("--select", an.select, "Explicit feature keys (Counter|Instance)");
  analyze_cmd->add_option("--top-k", an.top_k, "Select the k highest-variance features");
  analyze_cmd->add_option("--endpoint", an.endpoint, "Chat-completion URL for the http backend");
  analyze_cmd->add_option("--api-key-env", an.api_key_env, "Environment variable holding the API key (default: CIAF_API_KEY if set)");
  analyze_cmd->add_option("--parallelism", an.parallelism)->check(CLI::PositiveNumber)->capture_default_str();
  analyze_cmd->add_option("--timeout", an.timeout_s, "Per-request timeout in seconds")->capture_default_str();
  analyze_cmd->add_option("--max-retries", an.max_retries)->check(CLI::NonNegativeNumber)->capture_default_str();
  analyze_cmd->add_option("--sensitivity", an.sensitivity, "Event burst threshold in std units")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  analyze_cmd->add_option("--request", an.request, "Analyst request routed through the prompt gate");
  analyze_cmd->add_option("--audit", an.audit, "Gate audit log (JSON Lines)");
  analyze_cmd->add_option("--attr", an.attrs, "Structured attribute key=value");

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate_cmd->add_option("--truth", ev.truth, "Ground-truth labels")->required();
  evaluate_cmd->add_option("--pred", ev.pred, "Predicted labels (e.g. predictions.csv)")->required();
  evaluate_cmd->add_option("--json", ev.json_out, "Also write the JSON metrics report here");

  std::string report_input;
  auto* report_cmd = app.add_subcommand("report", "Re-render a saved report.json");
  report_cmd->add_option("--input", report_input, "report.json from analyze")->required();

  for (auto* sub : {gate_cmd, ingest_cmd, gen_cmd, analyze_cmd, evaluate_cmd, report_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageExit;
  }

  try {
    if (*gate_cmd) return run_gate(g, gate_args);
    if (*ingest_cmd) return run_ingest(ingest_args);
    if (*gen_cmd) return run_gen(g, gen_args);
    if (*analyze_cmd) return run_analyze(g, an);
    if (*evaluate_cmd) return run_evaluate(g, ev);
    if (*report_cmd) return run_report(g, report_input);
  } catch (const PhaseError& e) {
    std::cerr << "error [" << to_string(e.family()) << "]: " << e.what() << "\n";
    return exit_code(e.family());
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.family()) << "]: " << e.what() << "\n";
    return exit_code(e.family());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kUsageExit;
}
