#pragma once

#include "ciaf/ingestion.hpp"
#include "ciaf/likert.hpp"

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ciaf {

/// "CounterName|InstanceName", or just "CounterName" when the instance is empty.
std::string feature_key(std::string_view counter, std::string_view instance);

/// Counter part of a feature key.
std::string_view counter_of(std::string_view key);

/// Resolves a counter name (or exact key) to one column among `keys`: an exact
/// key match wins, otherwise the unique column with that counter part, with
/// the `_Total` instance preferred among several. Nullopt if none/ambiguous.
std::optional<std::size_t> resolve_feature(std::span<const std::string> keys, std::string_view feature);

/// Per-minute pivot of performance records. Row-major cells; a missing cell
/// means no record for that key in that minute.
struct FeatureMatrix {
  std::vector<Minute> rows;
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> cells;

  std::optional<std::size_t> column_index(std::string_view key) const;

  /// Projection onto `keys` in the given order. Throws UnknownFeature.
  FeatureMatrix select(std::span<const std::string> keys) const;
};

struct FeatureStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1) deviation; 0 when n == 1
  std::size_t count = 0;
};

using StatsMap = std::map<std::string, FeatureStats>;

struct TopK {
  std::size_t k = 0;
};
struct Explicit {
  std::vector<std::string> keys;
};
using FeatureSelector = std::variant<TopK, Explicit>;

struct DroppedRow {
  Minute minute;
  std::vector<std::string> missing_columns;
};

struct LikertMatrix {
  LikertScheme scheme = LikertScheme::Seven;
  std::vector<Minute> rows;
  std::vector<std::string> columns;
  std::vector<std::vector<LikertLevel>> cells;
  std::vector<DroppedRow> dropped_rows;
};

/// Read-only view of one Likert row alongside its column keys.
struct LikertRowView {
  std::span<const std::string> columns;
  std::span<const LikertLevel> levels;
};

inline LikertRowView row_view(const LikertMatrix& m, std::size_t i) {
  return LikertRowView{m.columns, m.cells[i]};
}

/// Mean per (minute, key); rows cover every minute between the first and last
/// record. Throws EmptyInput for no records.
FeatureMatrix resample_minutely(std::span<const PerfRecord> records);

/// Mean and sample standard deviation over non-missing cells. Throws EmptyColumn.
StatsMap compute_stats(const FeatureMatrix& matrix);

/// top_k: largest deviation first, ties by key. Explicit: verbatim, after
/// checking every key exists (UnknownFeature otherwise).
std::vector<std::string> select_features(const StatsMap& stats, const FeatureSelector& selector);

/// Standardizes each cell by its column stats and bins with the three-sigma
/// scheme. Zero-deviation columns map to normal. Rows with a missing cell are
/// dropped and recorded. Throws StatsMismatch when a column lacks stats.
LikertMatrix to_likert(const FeatureMatrix& matrix, const StatsMap& stats, LikertScheme scheme);

LikertLevel likert_level(double x, const FeatureStats& stats, LikertScheme scheme);

/// "Key=level; Key=level" in column order, level names with spaces.
std::string row_to_text(const LikertRowView& row);

/// CSV with a leading `minute` column (RFC 3339). Missing numeric cells are empty.
void write_matrix_csv(std::ostream& out, const FeatureMatrix& matrix);
void write_likert_csv(std::ostream& out, const LikertMatrix& matrix);

}  // namespace ciaf
