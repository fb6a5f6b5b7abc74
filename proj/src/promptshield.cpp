#include "ciaf/promptshield.hpp"

#include "ciaf/digest.hpp"
#include "ciaf/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <regex>

namespace ciaf {
namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_ascii_punct(unsigned char c) {
  return c < 0x80 && std::ispunct(c);
}

bool contains_run(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return false;
  return std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) != tokens.end();
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += v[i];
  }
  return out;
}

struct Marker {
  const char* name;
  std::regex pattern;
};

const std::vector<Marker>& markers() {
  static const std::vector<Marker> kMarkers = [] {
    auto re = [](const char* p) { return std::regex(p, std::regex::ECMAScript | std::regex::icase); };
    return std::vector<Marker>{
        {"ignore_previous",
         re(R"(\bignore\s+(all\s+|any\s+|the\s+|your\s+)*(previous|prior|above|earlier|preceding)\s+(instructions?|prompts?|rules|directions|context))")},
        {"disregard_system",
         re(R"(\bdisregard\s+(all\s+|the\s+|your\s+|any\s+)*(system\s+prompt|system\s+message|previous|prior|instructions|rules))")},
        {"forget_instructions",
         re(R"(\bforget\s+(all\s+|everything\s+|your\s+|the\s+|about\s+)*(instructions|rules|guidelines|you\s+were\s+told))")},
        {"roleplay_override",
         re(R"(\byou\s+are\s+now\b|\bpretend\s+(to\s+be|you\s+are)\b|\bact\s+as\s+(an?\s+)?(unrestricted|unfiltered|evil|different)|\broleplay\s+as\b|\bfrom\s+now\s+on,?\s+you\b)")},
        {"reveal_system_prompt",
         re(R"(\b(reveal|print|show|repeat|output|leak|display)\s+(me\s+)?(your\s+|the\s+)?(system\s+prompt|hidden\s+instructions|initial\s+instructions|original\s+instructions))")},
        {"developer_mode", re(R"(\bdeveloper\s+mode\b|\bdan\s+mode\b|\bjailbreak|\bdo\s+anything\s+now\b)")},
        {"override_instructions",
         re(R"(\b(override|bypass|circumvent)\s+(the\s+|your\s+|all\s+|any\s+)*(safety|instructions|rules|guardrails|restrictions|system|filters?))")},
        {"delimiter_injection",
         re(R"(new\s+instructions\s*:|#{2,}\s*(system|instruction)|\[\s*system\s*\]|<\|im_start\|>|</?system>)")},
        {"forced_label",
         re(R"(\b(always|only)\s+(answer|respond|output|reply|say|classify|return)\b[^.\n]{0,60}\b(legit|normal|benign|safe)\b)")},
    };
  }();
  return kMarkers;
}

const AttackScenario* pick_scenario(const OntologyDoc& doc, const std::string& function_id,
                                    const std::vector<std::string>& tokens) {
  const AttackScenario* best = nullptr;
  bool best_named = false;
  std::string best_key;
  for (const auto& s : doc.scenarios) {
    if (s.function_id != function_id) continue;
    bool named = contains_run(tokens, normalize_input(s.name));
    std::string key = join(normalize_input(s.name)) + "\x01" + s.name;
    if (!best || (named && !best_named) || (named == best_named && key < best_key)) {
      best = &s;
      best_named = named;
      best_key = key;
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(GateOutcome outcome) {
  return outcome == GateOutcome::Replaced ? "Replaced" : "Rejected";
}

std::vector<std::string> normalize_input(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_ascii_space(c)) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else if (is_ascii_punct(c) || c == 0) {
      continue;
    } else if (c < 0x80) {
      if (std::iscntrl(c)) continue;
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::optional<IntentMatch> match_intent(const OntologyDoc& doc, const std::vector<std::string>& tokens) {
  std::optional<IntentMatch> best;
  for (const auto& fn : doc.functions) {
    IntentMatch m{fn.id, 0, {}};
    for (const auto& phrase : fn.trigger_phrases) {
      if (contains_run(tokens, phrase)) {
        ++m.score;
        m.matched_tokens.push_back(join(phrase));
      }
    }
    if (m.score < fn.min_match_score) continue;
    if (!best || m.score > best->score || (m.score == best->score && m.function_id < best->function_id)) {
      best = std::move(m);
    }
  }
  return best;
}

std::vector<std::string> detect_injection_markers(std::string_view text) {
  std::string flat;
  flat.reserve(text.size());
  for (char ch : text) {
    // NUL and other control bytes would otherwise split regex matches oddly.
    auto c = static_cast<unsigned char>(ch);
    flat.push_back(c < 0x20 && !is_ascii_space(c) ? ' ' : ch);
  }
  std::vector<std::string> found;
  for (const auto& m : markers()) {
    if (std::regex_search(flat, m.pattern)) found.emplace_back(m.name);
  }
  return found;
}

GateDecision gate(const OntologyDoc& doc, const RawUserInput& input) {
  GateDecision d;
  d.audit.timestamp = std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
  d.audit.input_digest = sha256_hex(input.text);
  d.audit.advisory_markers = detect_injection_markers(input.text);

  auto reject = [&](std::string reason) {
    d.outcome = GateOutcome::Rejected;
    d.reason = std::move(reason);
    d.validated.reset();
    d.audit.decision = GateOutcome::Rejected;
    return d;
  };

  auto tokens = normalize_input(input.text);
  auto match = match_intent(doc, tokens);
  if (!match) return reject(std::string(kNoIntent));
  d.audit.function_id = match->function_id;

  const AttackScenario* scenario = pick_scenario(doc, match->function_id, tokens);
  if (!scenario) return reject("function '" + match->function_id + "' has no scenario");

  try {
    auto prompts = resolve_prompts(*scenario, input.structured_attributes);
    d.outcome = GateOutcome::Replaced;
    d.validated = ValidatedPrompt{std::move(prompts.system_prompt), std::move(prompts.user_prompt_template),
                                  scenario->name};
    d.audit.decision = GateOutcome::Replaced;
    return d;
  } catch (const MissingAttribute& e) {
    return reject(std::string("MissingAttribute: ") + e.what());
  } catch (const TypeMismatch& e) {
    return reject(std::string("TypeMismatch: ") + e.what());
  }
}

std::string audit_to_json(const GateAuditEntry& entry) {
  nlohmann::json j;
  j["timestamp"] = format_timestamp(entry.timestamp);
  j["input_digest"] = entry.input_digest;
  j["decision"] = std::string(to_string(entry.decision));
  j["function_id"] = entry.function_id ? nlohmann::json(*entry.function_id) : nlohmann::json(nullptr);
  j["advisory_markers"] = entry.advisory_markers;
  return j.dump();
}

std::string decision_to_json(const GateDecision& decision) {
  nlohmann::json j;
  j["outcome"] = std::string(to_string(decision.outcome));
  if (decision.validated) {
    j["scenario"] = decision.validated->scenario_name;
    j["system_prompt"] = decision.validated->system_prompt;
    j["user_prompt_template"] = decision.validated->user_prompt_template;
  }
  if (decision.reason) j["reason"] = *decision.reason;
  j["function_id"] =
      decision.audit.function_id ? nlohmann::json(*decision.audit.function_id) : nlohmann::json(nullptr);
  j["input_digest"] = decision.audit.input_digest;
  j["advisory_markers"] = decision.audit.advisory_markers;
  // Raw bytes may be invalid UTF-8; replace rather than throw.
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

AuditSink::AuditSink(const std::filesystem::path& path)
    : file_(path, std::ios::app | std::ios::binary), out_(&file_) {
  if (!file_) throw Error(ErrorFamily::Input, "cannot open audit file: " + path.string());
}

void AuditSink::append(const GateAuditEntry& entry) {
  std::string line = audit_to_json(entry);
  std::lock_guard<std::mutex> lock(mu_);
  *out_ << line << '\n';
  out_->flush();
}

}  // namespace ciaf
