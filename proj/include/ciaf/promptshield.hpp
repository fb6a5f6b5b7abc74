#pragma once

#include "ciaf/ontology.hpp"
#include "ciaf/time.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ciaf {

/// Untrusted analyst input. Parameters only ever enter through the explicit
/// structured map; the free text is used for intent matching and nothing else.
struct RawUserInput {
  std::string text;
  AttributeValues structured_attributes;
};

struct IntentMatch {
  std::string function_id;
  int score = 0;
  std::vector<std::string> matched_tokens;
};

struct ValidatedPrompt {
  std::string system_prompt;
  std::string user_prompt_template;
  std::string scenario_name;
};

enum class GateOutcome { Replaced, Rejected };

std::string_view to_string(GateOutcome outcome);

struct GateAuditEntry {
  std::chrono::sys_time<std::chrono::milliseconds> timestamp;
  std::string input_digest;  // sha256 hex of the raw text
  GateOutcome decision = GateOutcome::Rejected;
  std::optional<std::string> function_id;
  std::vector<std::string> advisory_markers;
};

struct GateDecision {
  GateOutcome outcome = GateOutcome::Rejected;
  std::optional<ValidatedPrompt> validated;  // present iff Replaced
  std::optional<std::string> reason;         // present iff Rejected
  GateAuditEntry audit;
};

inline constexpr std::string_view kNoIntent = "no registered intent";

/// Case-folds ASCII, strips ASCII punctuation, splits on whitespace. Bytes
/// outside ASCII are kept as token content. Never fails.
std::vector<std::string> normalize_input(std::string_view text);

/// Scores each function by how many of its trigger phrases occur as contiguous
/// token runs in `tokens`. Returns the best function reaching its
/// min_match_score; ties go to the lexicographically smaller id.
std::optional<IntentMatch> match_intent(const OntologyDoc& doc, const std::vector<std::string>& tokens);

/// Advisory only: names of bundled injection patterns found in the text.
std::vector<std::string> detect_injection_markers(std::string_view text);

/// Replaces a matched input with the ontology's canonical prompts, or rejects
/// it. Free text never reaches the returned prompts.
GateDecision gate(const OntologyDoc& doc, const RawUserInput& input);

/// One JSON object (no trailing newline) describing a decision.
std::string decision_to_json(const GateDecision& decision);
std::string audit_to_json(const GateAuditEntry& entry);

/// Append-only JSON Lines sink; appends are serialized.
class AuditSink {
 public:
  explicit AuditSink(std::ostream& out) : out_(&out) {}
  explicit AuditSink(const std::filesystem::path& path);

  AuditSink(const AuditSink&) = delete;
  AuditSink& operator=(const AuditSink&) = delete;

  void append(const GateAuditEntry& entry);

 private:
  std::mutex mu_;
  std::ofstream file_;
  std::ostream* out_;
};

}  // namespace ciaf
