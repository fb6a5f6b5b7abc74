#pragma once

#include <optional>
#include <string_view>

namespace ciaf {

/// Binary incident label. "Legit" aliases Normal; "Ransomware" aliases Malicious.
enum class ClassificationLabel { Normal, Malicious };

/// Canonical report names: "Legit" / "Malicious".
std::string_view to_string(ClassificationLabel label);

/// Case-insensitive; accepts normal/legit and malicious/ransomware.
std::optional<ClassificationLabel> parse_label(std::string_view text);

}  // namespace ciaf
