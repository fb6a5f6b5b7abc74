#include "ciaf/ontology.hpp"

#include "ciaf/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ciaf {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto first = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(first) || first == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_';
  });
}

// Lowercase ASCII alphanumerics plus UTF-8 continuation/lead bytes.
bool is_trigger_token(std::string_view tok) {
  if (tok.empty()) return false;
  return std::all_of(tok.begin(), tok.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return (u >= 'a' && u <= 'z') || (u >= '0' && u <= '9') || u >= 0x80;
  });
}

// Alphanumerics only, lowercased: "Working Set - Private" -> "workingsetprivate".
std::string squash(std::string_view s) {
  std::string out;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// ---- JSON field access with entity-named errors ----

const json& field(const json& obj, const char* key, const std::string& entity) {
  if (!obj.is_object()) throw ValidationError(entity, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(entity, std::string("missing key '") + key + "'");
  return *it;
}

std::string get_string(const json& obj, const char* key, const std::string& entity) {
  const json& v = field(obj, key, entity);
  if (!v.is_string()) throw ValidationError(entity, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

const json& get_array(const json& obj, const char* key, const std::string& entity) {
  const json& v = field(obj, key, entity);
  if (!v.is_array()) throw ValidationError(entity, std::string("'") + key + "' must be an array");
  return v;
}

Comparator parse_comparator(const std::string& s, const std::string& entity) {
  if (s == "at_least") return Comparator::AtLeast;
  if (s == "at_most") return Comparator::AtMost;
  throw ValidationError(entity, "comparator must be at_least or at_most, got '" + s + "'");
}

AttributeKind parse_kind(const std::string& s, const std::string& entity) {
  if (s == "text") return AttributeKind::Text;
  if (s == "integer") return AttributeKind::Integer;
  if (s == "real") return AttributeKind::Real;
  if (s == "counter_name") return AttributeKind::CounterName;
  throw ValidationError(entity, "unknown attribute kind '" + s + "'");
}

std::vector<std::string> split_phrase(std::string_view phrase) {
  std::vector<std::string> toks;
  std::istringstream in{std::string(phrase)};
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

ModelSpec model_from_json(const json& j) {
  const std::string entity = "model";
  ModelSpec m;
  std::string kind = get_string(j, "backend_kind", entity);
  if (kind == "mock") m.backend_kind = BackendKind::Mock;
  else if (kind == "http") m.backend_kind = BackendKind::Http;
  else throw ValidationError(entity, "backend_kind must be mock or http");
  m.model_name = get_string(j, "model_name", entity);
  if (auto it = j.find("temperature"); it != j.end()) {
    if (!it->is_number()) throw ValidationError(entity, "temperature must be a number");
    m.temperature = it->get<double>();
  }
  if (auto it = j.find("max_output_tokens"); it != j.end()) {
    if (!it->is_number_integer()) throw ValidationError(entity, "max_output_tokens must be an integer");
    m.max_output_tokens = it->get<int>();
  }
  return m;
}

FunctionSpec function_from_json(const json& j, std::size_t idx) {
  std::string entity = "function[" + std::to_string(idx) + "]";
  FunctionSpec f;
  f.id = get_string(j, "id", entity);
  entity = "function '" + f.id + "'";
  if (auto it = j.find("description"); it != j.end() && it->is_string()) f.description = *it;
  for (const auto& p : get_array(j, "trigger_phrases", entity)) {
    if (!p.is_string()) throw ValidationError(entity, "trigger phrases must be strings");
    f.trigger_phrases.push_back(split_phrase(p.get<std::string>()));
  }
  const json& score = field(j, "min_match_score", entity);
  if (!score.is_number_integer()) throw ValidationError(entity, "min_match_score must be an integer");
  f.min_match_score = score.get<int>();
  return f;
}

AttackScenario scenario_from_json(const json& j, std::size_t idx) {
  std::string entity = "scenario[" + std::to_string(idx) + "]";
  AttackScenario s;
  s.name = get_string(j, "name", entity);
  entity = "scenario '" + s.name + "'";
  s.function_id = get_string(j, "function_id", entity);
  for (const auto& f : get_array(j, "required_features", entity)) {
    if (!f.is_string()) throw ValidationError(entity, "required_features must be strings");
    s.required_features.push_back(f.get<std::string>());
  }
  for (const auto& p : get_array(j, "detection_rule", entity)) {
    RulePredicate pred;
    pred.feature = get_string(p, "feature", entity);
    pred.comparator = parse_comparator(get_string(p, "comparator", entity), entity);
    std::string level = get_string(p, "level", entity);
    auto name = parse_likert_name(level);
    if (!name) throw ValidationError(entity, "unknown Likert level '" + level + "'");
    pred.level = *name;
    s.detection_rule.push_back(std::move(pred));
  }
  s.system_prompt = get_string(j, "system_prompt", entity);
  s.user_prompt_template = get_string(j, "user_prompt_template", entity);
  if (auto it = j.find("attributes"); it != j.end()) {
    if (!it->is_array()) throw ValidationError(entity, "'attributes' must be an array");
    for (const auto& a : *it) {
      AttributeSpec spec;
      spec.name = get_string(a, "name", entity);
      spec.kind = parse_kind(get_string(a, "kind", entity), entity);
      if (auto r = a.find("required"); r != a.end()) {
        if (!r->is_boolean()) throw ValidationError(entity, "'required' must be a boolean");
        spec.required = r->get<bool>();
      }
      s.attributes.push_back(std::move(spec));
    }
  }
  return s;
}

json to_json(const OntologyDoc& doc) {
  json j;
  j["version"] = doc.version;
  j["model"] = {{"backend_kind", std::string(to_string(doc.model.backend_kind))},
                {"model_name", doc.model.model_name},
                {"temperature", doc.model.temperature},
                {"max_output_tokens", doc.model.max_output_tokens}};
  json fns = json::array();
  for (const auto& f : doc.functions) {
    json phrases = json::array();
    for (const auto& p : f.trigger_phrases) phrases.push_back(join(p, " "));
    fns.push_back({{"id", f.id},
                   {"description", f.description},
                   {"trigger_phrases", phrases},
                   {"min_match_score", f.min_match_score}});
  }
  j["functions"] = fns;
  json scs = json::array();
  for (const auto& s : doc.scenarios) {
    json rule = json::array();
    for (const auto& p : s.detection_rule) {
      rule.push_back({{"feature", p.feature},
                      {"comparator", std::string(to_string(p.comparator))},
                      {"level", std::string(identifier(p.level))}});
    }
    json attrs = json::array();
    for (const auto& a : s.attributes) {
      attrs.push_back({{"name", a.name}, {"kind", std::string(to_string(a.kind))}, {"required", a.required}});
    }
    scs.push_back({{"name", s.name},
                   {"function_id", s.function_id},
                   {"required_features", s.required_features},
                   {"detection_rule", rule},
                   {"system_prompt", s.system_prompt},
                   {"user_prompt_template", s.user_prompt_template},
                   {"attributes", attrs}});
  }
  j["scenarios"] = scs;
  return j;
}

void check_value(const AttributeSpec& spec, const std::string& value) {
  auto fail = [&](const std::string& why) { throw TypeMismatch(spec.name, why); };
  for (char c : value) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x20 || u == 0x7f) fail("control characters are not allowed");
    if (c == '{' || c == '}') fail("braces are not allowed");
  }
  switch (spec.kind) {
    case AttributeKind::Text:
      if (value.size() > 256) fail("text longer than 256 bytes");
      break;
    case AttributeKind::Integer: {
      long long v = 0;
      const char* b = value.data();
      const char* e = b + value.size();
      if (b != e && *b == '+') ++b;
      auto [p, ec] = std::from_chars(b, e, v);
      if (value.empty() || ec != std::errc{} || p != e) fail("expected an integer, got '" + value + "'");
      break;
    }
    case AttributeKind::Real: {
      double v = 0;
      const char* b = value.data();
      const char* e = b + value.size();
      auto [p, ec] = std::from_chars(b, e, v);
      if (value.empty() || ec != std::errc{} || p != e || !std::isfinite(v)) {
        fail("expected a finite real number, got '" + value + "'");
      }
      break;
    }
    case AttributeKind::CounterName: {
      if (value.empty() || value.size() > 128) fail("counter name must be 1-128 characters");
      for (char c : value) {
        auto u = static_cast<unsigned char>(c);
        if (!(std::isalnum(u) || std::string_view(" %./-_()#:").find(c) != std::string_view::npos)) {
          fail("counter name contains '" + std::string(1, c) + "'");
        }
      }
      break;
    }
  }
}

// Shared template walker: calls `on_placeholder(name)` for identifier-like
// `{name}` segments and `on_text` for everything else.
template <typename OnText, typename OnPlaceholder>
void walk_template(std::string_view tmpl, OnText on_text, OnPlaceholder on_placeholder) {
  std::size_t i = 0;
  while (i < tmpl.size()) {
    std::size_t open = tmpl.find('{', i);
    if (open == std::string_view::npos) {
      on_text(tmpl.substr(i));
      return;
    }
    std::size_t close = tmpl.find('}', open + 1);
    if (close == std::string_view::npos) {
      on_text(tmpl.substr(i));
      return;
    }
    std::string_view inner = tmpl.substr(open + 1, close - open - 1);
    if (is_identifier(inner)) {
      on_text(tmpl.substr(i, open - i));
      on_placeholder(inner);
      i = close + 1;
    } else {
      on_text(tmpl.substr(i, open - i + 1));
      i = open + 1;
    }
  }
}

}  // namespace

std::string_view to_string(Comparator c) { return c == Comparator::AtLeast ? "at_least" : "at_most"; }

std::string_view to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::Text: return "text";
    case AttributeKind::Integer: return "integer";
    case AttributeKind::Real: return "real";
    case AttributeKind::CounterName: return "counter_name";
  }
  return "text";
}

std::string_view to_string(BackendKind kind) { return kind == BackendKind::Mock ? "mock" : "http"; }

std::vector<std::string> placeholders(std::string_view tmpl) {
  std::vector<std::string> out;
  walk_template(tmpl, [](std::string_view) {}, [&](std::string_view name) { out.emplace_back(name); });
  return out;
}

std::string render_rule(const std::vector<RulePredicate>& rule) {
  std::string out;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    if (i) out += " and ";
    out += rule[i].feature;
    out += rule[i].comparator == Comparator::AtLeast ? " should be at least " : " should be at most ";
    out += display_name(rule[i].level);
  }
  return out;
}

void validate(const OntologyDoc& doc) {
  if (!(doc.model.temperature >= 0.0) || !std::isfinite(doc.model.temperature)) {
    throw ValidationError("model", "temperature must be >= 0");
  }
  if (doc.model.max_output_tokens < 1) throw ValidationError("model", "max_output_tokens must be >= 1");

  std::set<std::string> fn_ids;
  for (const auto& f : doc.functions) {
    std::string entity = "function '" + f.id + "'";
    if (f.id.empty()) throw ValidationError("function", "empty id");
    if (!fn_ids.insert(f.id).second) throw ValidationError(entity, "duplicate function id");
    if (f.trigger_phrases.empty()) throw ValidationError(entity, "no trigger phrases");
    if (f.min_match_score < 1) throw ValidationError(entity, "min_match_score must be >= 1");
    for (const auto& phrase : f.trigger_phrases) {
      if (phrase.empty()) throw ValidationError(entity, "empty trigger phrase");
      for (const auto& tok : phrase) {
        if (!is_trigger_token(tok)) {
          throw ValidationError(entity, "trigger token '" + tok + "' must be lowercase and punctuation-free");
        }
      }
    }
  }

  std::set<std::string> names;
  for (const auto& s : doc.scenarios) {
    std::string entity = "scenario '" + s.name + "'";
    if (s.name.empty()) throw ValidationError("scenario", "empty name");
    if (!names.insert(lower(s.name)).second) throw ValidationError(entity, "duplicate scenario name");
    if (!fn_ids.count(s.function_id)) {
      throw ValidationError(entity, "references unknown function_id '" + s.function_id + "'");
    }
    if (s.required_features.empty()) throw ValidationError(entity, "required_features is empty");
    std::set<std::string> features(s.required_features.begin(), s.required_features.end());
    if (features.size() != s.required_features.size()) {
      throw ValidationError(entity, "duplicate required feature");
    }
    for (const auto& p : s.detection_rule) {
      if (!features.count(p.feature)) {
        throw ValidationError(entity, "detection rule references '" + p.feature +
                                          "', which is not a required feature");
      }
    }
    std::set<std::string> attr_names;
    for (const auto& a : s.attributes) {
      if (!is_identifier(a.name)) throw ValidationError(entity, "attribute name '" + a.name + "' is not an identifier");
      if (a.name == kDataPlaceholder || a.name == kRulePlaceholder) {
        throw ValidationError(entity, "attribute name '" + a.name + "' is reserved");
      }
      if (!attr_names.insert(a.name).second) throw ValidationError(entity, "duplicate attribute '" + a.name + "'");
    }
    for (const auto* tmpl : {&s.system_prompt, &s.user_prompt_template}) {
      for (const auto& ph : placeholders(*tmpl)) {
        if (ph != kDataPlaceholder && ph != kRulePlaceholder && !attr_names.count(ph)) {
          throw ValidationError(entity, "unknown placeholder '{" + ph + "}'");
        }
      }
    }
    // The system prompt must state the declarative rule, either through
    // {detection_rule} or by naming each feature and its bound literally.
    auto sys_ph = placeholders(s.system_prompt);
    bool renders_rule = std::find(sys_ph.begin(), sys_ph.end(), kRulePlaceholder) != sys_ph.end();
    if (!renders_rule) {
      std::string squashed = squash(s.system_prompt);
      std::string spaced = collapse_spaces(s.system_prompt);
      for (const auto& p : s.detection_rule) {
        if (squashed.find(squash(p.feature)) == std::string::npos) {
          throw ValidationError(entity, "system prompt does not mention rule feature '" + p.feature + "'");
        }
        std::string bound = std::string(p.comparator == Comparator::AtLeast ? "at least " : "at most ") +
                            std::string(display_name(p.level));
        if (spaced.find(bound) == std::string::npos) {
          throw ValidationError(entity, "system prompt does not state rule bound '" + bound + "'");
        }
      }
    }
  }
}

OntologyDoc parse_ontology(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(json_text, e.byte);
    throw ParseError(line, col, e.what());
  }
  if (!j.is_object()) throw ParseError(1, 1, "top-level value must be an object");

  OntologyDoc doc;
  doc.version = get_string(j, "version", "document");
  doc.model = model_from_json(field(j, "model", "document"));
  std::size_t i = 0;
  for (const auto& f : get_array(j, "functions", "document")) doc.functions.push_back(function_from_json(f, i++));
  i = 0;
  for (const auto& s : get_array(j, "scenarios", "document")) doc.scenarios.push_back(scenario_from_json(s, i++));
  validate(doc);
  return doc;
}

OntologyDoc load_ontology(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorFamily::Ontology, "cannot open ontology file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ontology(ss.str());
}

std::string serialize(const OntologyDoc& doc) { return to_json(doc).dump(2) + "\n"; }

const AttackScenario& lookup_scenario(const OntologyDoc& doc, std::string_view name) {
  std::string key = lower(name);
  for (const auto& s : doc.scenarios) {
    if (lower(s.name) == key) return s;
  }
  std::vector<std::string> available;
  for (const auto& s : doc.scenarios) available.push_back(s.name);
  std::sort(available.begin(), available.end());
  std::string list;
  for (std::size_t k = 0; k < available.size(); ++k) {
    list += (k ? ", \"" : "\"") + available[k] + "\"";
  }
  throw UnknownScenario("unknown scenario '" + std::string(name) + "'; available: [" + list + "]");
}

const FunctionSpec* find_function(const OntologyDoc& doc, std::string_view id) {
  for (const auto& f : doc.functions) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

ResolvedPrompts resolve_prompts(const AttackScenario& scenario, const AttributeValues& attributes) {
  std::map<std::string, std::string, std::less<>> values;
  for (const auto& spec : scenario.attributes) {
    auto it = attributes.find(spec.name);
    if (it == attributes.end()) {
      if (spec.required) throw MissingAttribute(spec.name);
      values[spec.name] = "";
      continue;
    }
    check_value(spec, it->second);
    values[spec.name] = it->second;
  }

  auto substitute = [&](std::string_view tmpl) {
    std::string out;
    walk_template(
        tmpl, [&](std::string_view text) { out += text; },
        [&](std::string_view name) {
          if (name == kDataPlaceholder) {
            out += "{data}";
          } else if (name == kRulePlaceholder) {
            out += render_rule(scenario.detection_rule);
          } else if (auto it = values.find(name); it != values.end()) {
            out += it->second;
          } else {
            // Undeclared placeholders are rejected at load; a hand-built
            // scenario can still reach here.
            throw MissingAttribute(std::string(name));
          }
        });
    return out;
  };
  return ResolvedPrompts{substitute(scenario.system_prompt), substitute(scenario.user_prompt_template)};
}

std::string instantiate_data(std::string_view user_template, std::string_view data) {
  std::string out;
  walk_template(
      user_template, [&](std::string_view text) { out += text; },
      [&](std::string_view name) {
        if (name == kDataPlaceholder) out += data;
        else out += "{" + std::string(name) + "}";
      });
  return out;
}

}  // namespace ciaf
