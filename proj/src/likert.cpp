#include "ciaf/likert.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace ciaf {
namespace {

constexpr std::array<std::string_view, 7> kDisplay = {
    "extremely low", "very low", "low", "normal", "high", "very high", "extremely high"};
constexpr std::array<std::string_view, 7> kIdent = {
    "extremely_low", "very_low", "low", "normal", "high", "very_high", "extremely_high"};

}  // namespace

LikertName LikertLevel::name() const {
  int offset = scheme == LikertScheme::Seven ? 0 : 1;
  return static_cast<LikertName>(rank + offset);
}

int scheme_size(LikertScheme scheme) { return scheme == LikertScheme::Seven ? 7 : 5; }

std::string_view to_string(LikertScheme scheme) {
  return scheme == LikertScheme::Seven ? "seven" : "five";
}

std::optional<LikertScheme> parse_scheme(std::string_view text) {
  if (text == "seven" || text == "7") return LikertScheme::Seven;
  if (text == "five" || text == "5") return LikertScheme::Five;
  return std::nullopt;
}

std::optional<int> rank_in(LikertName name, LikertScheme scheme) {
  int idx = static_cast<int>(name);
  if (scheme == LikertScheme::Seven) return idx;
  if (name == LikertName::ExtremelyLow || name == LikertName::ExtremelyHigh) return std::nullopt;
  return idx - 1;
}

std::string_view display_name(LikertName name) { return kDisplay[static_cast<int>(name)]; }
std::string_view display_name(const LikertLevel& level) { return display_name(level.name()); }
std::string_view identifier(LikertName name) { return kIdent[static_cast<int>(name)]; }

std::optional<LikertName> parse_likert_name(std::string_view text) {
  std::string norm;
  norm.reserve(text.size());
  for (char c : text) {
    char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    norm.push_back(lc == ' ' || lc == '-' ? '_' : lc);
  }
  auto it = std::find(kIdent.begin(), kIdent.end(), norm);
  if (it == kIdent.end()) return std::nullopt;
  return static_cast<LikertName>(it - kIdent.begin());
}

LikertLevel level_for_z(double z, LikertScheme scheme) {
  LikertName name;
  if (z < -3) name = LikertName::ExtremelyLow;
  else if (z < -2) name = LikertName::VeryLow;
  else if (z < -1) name = LikertName::Low;
  else if (z <= 1) name = LikertName::Normal;
  else if (z <= 2) name = LikertName::High;
  else if (z <= 3) name = LikertName::VeryHigh;
  else name = LikertName::ExtremelyHigh;

  if (scheme == LikertScheme::Five) {
    if (name == LikertName::ExtremelyLow) name = LikertName::VeryLow;
    if (name == LikertName::ExtremelyHigh) name = LikertName::VeryHigh;
  }
  return LikertLevel{scheme, *rank_in(name, scheme)};
}

}  // namespace ciaf
