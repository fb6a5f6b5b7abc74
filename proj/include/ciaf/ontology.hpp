#pragma once

#include "ciaf/likert.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ciaf {

enum class Comparator { AtLeast, AtMost };

std::string_view to_string(Comparator c);

/// One clause of a scenario's detection rule, e.g. "Available Bytes at_least low".
struct RulePredicate {
  std::string feature;
  Comparator comparator = Comparator::AtLeast;
  LikertName level = LikertName::Normal;

  bool operator==(const RulePredicate&) const = default;
};

enum class AttributeKind { Text, Integer, Real, CounterName };

std::string_view to_string(AttributeKind kind);

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::Text;
  bool required = true;

  bool operator==(const AttributeSpec&) const = default;
};

/// A registered user intent. Each trigger phrase is a lowercase,
/// punctuation-free token sequence.
struct FunctionSpec {
  std::string id;
  std::string description;
  std::vector<std::vector<std::string>> trigger_phrases;
  int min_match_score = 1;

  bool operator==(const FunctionSpec&) const = default;
};

enum class BackendKind { Mock, Http };

std::string_view to_string(BackendKind kind);

struct ModelSpec {
  BackendKind backend_kind = BackendKind::Mock;
  std::string model_name;
  double temperature = 0.0;
  int max_output_tokens = 16;

  bool operator==(const ModelSpec&) const = default;
};

struct AttackScenario {
  std::string name;
  std::string function_id;
  std::vector<std::string> required_features;
  std::vector<RulePredicate> detection_rule;
  std::string system_prompt;
  std::string user_prompt_template;
  std::vector<AttributeSpec> attributes;

  bool operator==(const AttackScenario&) const = default;
};

/// Validated knowledge base. Immutable after load; share freely across threads.
struct OntologyDoc {
  std::string version;
  std::vector<AttackScenario> scenarios;
  std::vector<FunctionSpec> functions;
  ModelSpec model;

  bool operator==(const OntologyDoc&) const = default;
};

/// Placeholder left in user templates for per-row instantiation.
inline constexpr std::string_view kDataPlaceholder = "data";
/// Placeholder expanded to the rendered detection rule.
inline constexpr std::string_view kRulePlaceholder = "detection_rule";

/// Reads and validates an ontology document. Throws ParseError for malformed
/// JSON (with line/column) and ValidationError for schema or invariant violations.
OntologyDoc load_ontology(const std::filesystem::path& path);
OntologyDoc parse_ontology(std::string_view json_text);

/// Checks every document invariant; throws ValidationError naming the entity.
void validate(const OntologyDoc& doc);

/// Pretty-printed JSON in the on-disk schema.
std::string serialize(const OntologyDoc& doc);

/// Case-insensitive exact-name lookup. Throws UnknownScenario listing the
/// available names.
const AttackScenario& lookup_scenario(const OntologyDoc& doc, std::string_view name);

const FunctionSpec* find_function(const OntologyDoc& doc, std::string_view id);

/// Names inside `{...}` in order of appearance (duplicates retained).
std::vector<std::string> placeholders(std::string_view tmpl);

/// "Available Bytes should be at least low and Working Set should be at least high".
std::string render_rule(const std::vector<RulePredicate>& rule);

struct ResolvedPrompts {
  std::string system_prompt;
  std::string user_prompt_template;  // still carries {data}

  bool operator==(const ResolvedPrompts&) const = default;
};

using AttributeValues = std::map<std::string, std::string>;

/// Substitutes every placeholder except {data}. Values are type-checked against
/// their AttributeSpec; throws MissingAttribute or TypeMismatch.
ResolvedPrompts resolve_prompts(const AttackScenario& scenario, const AttributeValues& attributes);

/// Replaces {data} in a resolved user template.
std::string instantiate_data(std::string_view user_template, std::string_view data);

}  // namespace ciaf
