#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace ciaf {

enum class LikertScheme { Five, Seven };

/// Scheme-independent level names. Not every name exists in every scheme:
/// the five-level scheme has no extremely_low / extremely_high.
enum class LikertName {
  ExtremelyLow,
  VeryLow,
  Low,
  Normal,
  High,
  VeryHigh,
  ExtremelyHigh,
};

/// An ordinal level within a particular scheme.
struct LikertLevel {
  LikertScheme scheme = LikertScheme::Seven;
  int rank = 3;

  LikertName name() const;
  bool operator==(const LikertLevel&) const = default;
};

int scheme_size(LikertScheme scheme);
std::string_view to_string(LikertScheme scheme);
std::optional<LikertScheme> parse_scheme(std::string_view text);

/// Rank of `name` in `scheme`, or nullopt when the scheme lacks that level.
std::optional<int> rank_in(LikertName name, LikertScheme scheme);

/// Display form with spaces: "very high".
std::string_view display_name(LikertName name);
std::string_view display_name(const LikertLevel& level);

/// Identifier form with underscores: "very_high".
std::string_view identifier(LikertName name);

/// Accepts identifier or display form, case-insensitively.
std::optional<LikertName> parse_likert_name(std::string_view text);

/// Three-sigma binning of a standardized value. The normal band is closed on
/// both sides; the outer bands are half-open away from the centre.
LikertLevel level_for_z(double z, LikertScheme scheme);

}  // namespace ciaf
