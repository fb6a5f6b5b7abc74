#pragma once

#include "ciaf/promptshield.hpp"

#include <string>
#include <vector>

namespace testing_support {

inline bool contains_run(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  }
  return false;
}

// True when some run of `run` consecutive input tokens shows up in the
// validated prompts without already being part of the ontology's own text.
inline bool leaks_free_text(const ciaf::OntologyDoc& doc, const std::string& input,
                            const ciaf::ValidatedPrompt& validated, std::size_t run = 4) {
  const auto in_tokens = ciaf::normalize_input(input);
  const auto out_tokens = ciaf::normalize_input(validated.system_prompt + " " + validated.user_prompt_template);
  std::string authored;
  for (const auto& s : doc.scenarios) {
    authored += s.system_prompt + " " + s.user_prompt_template + " " + ciaf::render_rule(s.detection_rule) + " ";
  }
  const auto authored_tokens = ciaf::normalize_input(authored);
  for (std::size_t i = 0; i + run <= in_tokens.size(); ++i) {
    std::vector<std::string> window(in_tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                    in_tokens.begin() + static_cast<std::ptrdiff_t>(i + run));
    if (contains_run(out_tokens, window) && !contains_run(authored_tokens, window)) return true;
  }
  return false;
}

}  // namespace testing_support
