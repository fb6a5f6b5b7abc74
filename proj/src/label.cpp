#include "ciaf/label.hpp"

#include <cctype>
#include <string>

namespace ciaf {

std::string_view to_string(ClassificationLabel label) {
  return label == ClassificationLabel::Normal ? "Legit" : "Malicious";
}

std::optional<ClassificationLabel> parse_label(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "normal" || lower == "legit") return ClassificationLabel::Normal;
  if (lower == "malicious" || lower == "ransomware") return ClassificationLabel::Malicious;
  return std::nullopt;
}

}  // namespace ciaf
