#include "ciaf/transform.hpp"

#include "ciaf/csv.hpp"
#include "ciaf/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

namespace ciaf {

std::string feature_key(std::string_view counter, std::string_view instance) {
  std::string key(counter);
  if (!instance.empty()) {
    key += '|';
    key += instance;
  }
  return key;
}

std::string_view counter_of(std::string_view key) {
  auto bar = key.find('|');
  return bar == std::string_view::npos ? key : key.substr(0, bar);
}

std::optional<std::size_t> resolve_feature(std::span<const std::string> keys, std::string_view feature) {
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i] == feature) return i;
  }
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (counter_of(keys[i]) == feature) hits.push_back(i);
  }
  if (hits.size() == 1) return hits.front();
  for (std::size_t i : hits) {
    if (keys[i] == feature_key(feature, "_Total")) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> FeatureMatrix::column_index(std::string_view key) const {
  auto it = std::find(columns.begin(), columns.end(), key);
  if (it == columns.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns.begin());
}

FeatureMatrix FeatureMatrix::select(std::span<const std::string> keys) const {
  std::vector<std::size_t> idx;
  for (const auto& k : keys) {
    auto i = column_index(k);
    if (!i) throw UnknownFeature("unknown feature column: " + k);
    idx.push_back(*i);
  }
  FeatureMatrix out;
  out.rows = rows;
  out.columns.assign(keys.begin(), keys.end());
  out.cells.reserve(cells.size());
  for (const auto& row : cells) {
    std::vector<std::optional<double>> r;
    r.reserve(idx.size());
    for (std::size_t i : idx) r.push_back(row[i]);
    out.cells.push_back(std::move(r));
  }
  return out;
}

FeatureMatrix resample_minutely(std::span<const PerfRecord> records) {
  if (records.empty()) throw EmptyInput("no performance records to resample", ErrorFamily::Analysis);

  std::set<std::string> keys;
  Minute first = floor_minute(records.front().timestamp);
  Minute last = first;
  for (const auto& r : records) {
    keys.insert(feature_key(r.counter_name, r.instance_name));
    Minute m = floor_minute(r.timestamp);
    first = std::min(first, m);
    last = std::max(last, m);
  }

  FeatureMatrix fm;
  fm.columns.assign(keys.begin(), keys.end());
  const auto n_rows = static_cast<std::size_t>((last - first).count()) + 1;
  fm.rows.reserve(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) fm.rows.push_back(first + std::chrono::minutes{i});

  std::map<std::string, std::size_t> col_of;
  for (std::size_t i = 0; i < fm.columns.size(); ++i) col_of[fm.columns[i]] = i;

  // Bucket values, then sum each bucket in sorted order so the mean does not
  // depend on input order.
  std::vector<std::vector<std::vector<double>>> buckets(n_rows, std::vector<std::vector<double>>(fm.columns.size()));
  for (const auto& r : records) {
    auto row = static_cast<std::size_t>((floor_minute(r.timestamp) - first).count());
    buckets[row][col_of[feature_key(r.counter_name, r.instance_name)]].push_back(r.value);
  }

  fm.cells.assign(n_rows, std::vector<std::optional<double>>(fm.columns.size()));
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t j = 0; j < fm.columns.size(); ++j) {
      auto& vals = buckets[i][j];
      if (vals.empty()) continue;
      std::sort(vals.begin(), vals.end());
      double sum = std::accumulate(vals.begin(), vals.end(), 0.0);
      fm.cells[i][j] = sum / static_cast<double>(vals.size());
    }
  }
  return fm;
}

StatsMap compute_stats(const FeatureMatrix& matrix) {
  StatsMap out;
  for (std::size_t j = 0; j < matrix.columns.size(); ++j) {
    std::vector<double> vals;
    for (const auto& row : matrix.cells) {
      if (row[j]) vals.push_back(*row[j]);
    }
    if (vals.empty()) throw EmptyColumn(matrix.columns[j]);

    // Shifted two-pass: deviations from the first value keep constant
    // columns at exactly zero spread.
    const double origin = vals.front();
    const double n = static_cast<double>(vals.size());
    double shift_sum = 0.0;
    for (double v : vals) shift_sum += v - origin;
    const double shift_mean = shift_sum / n;
    double ss = 0.0;
    for (double v : vals) {
      double d = (v - origin) - shift_mean;
      ss += d * d;
    }
    FeatureStats s;
    s.count = vals.size();
    s.mean = origin + shift_mean;
    s.stddev = vals.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    out.emplace(matrix.columns[j], s);
  }
  return out;
}

std::vector<std::string> select_features(const StatsMap& stats, const FeatureSelector& selector) {
  if (const auto* ex = std::get_if<Explicit>(&selector)) {
    for (const auto& k : ex->keys) {
      if (!stats.count(k)) throw UnknownFeature("unknown feature: " + k);
    }
    return ex->keys;
  }
  const auto& top = std::get<TopK>(selector);
  std::vector<std::pair<std::string, double>> ranked;
  for (const auto& [k, s] : stats) ranked.emplace_back(k, s.stddev);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < top.k; ++i) out.push_back(ranked[i].first);
  return out;
}

LikertLevel likert_level(double x, const FeatureStats& stats, LikertScheme scheme) {
  if (stats.stddev == 0.0) return level_for_z(0.0, scheme);
  return level_for_z((x - stats.mean) / stats.stddev, scheme);
}

LikertMatrix to_likert(const FeatureMatrix& matrix, const StatsMap& stats, LikertScheme scheme) {
  std::vector<const FeatureStats*> col_stats;
  for (const auto& c : matrix.columns) {
    auto it = stats.find(c);
    if (it == stats.end()) throw StatsMismatch(c);
    col_stats.push_back(&it->second);
  }

  LikertMatrix lm;
  lm.scheme = scheme;
  lm.columns = matrix.columns;
  for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
    const auto& row = matrix.cells[i];
    std::vector<std::string> missing;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!row[j]) missing.push_back(matrix.columns[j]);
    }
    if (!missing.empty()) {
      lm.dropped_rows.push_back(DroppedRow{matrix.rows[i], std::move(missing)});
      continue;
    }
    std::vector<LikertLevel> levels;
    levels.reserve(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) levels.push_back(likert_level(*row[j], *col_stats[j], scheme));
    lm.rows.push_back(matrix.rows[i]);
    lm.cells.push_back(std::move(levels));
  }
  return lm;
}

std::string row_to_text(const LikertRowView& row) {
  std::string out;
  for (std::size_t j = 0; j < row.levels.size(); ++j) {
    if (j) out += "; ";
    out += row.columns[j];
    out += '=';
    out += display_name(row.levels[j]);
  }
  return out;
}

void write_matrix_csv(std::ostream& out, const FeatureMatrix& matrix) {
  std::vector<std::string> header{"minute"};
  header.insert(header.end(), matrix.columns.begin(), matrix.columns.end());
  csv::write_row(out, header);
  for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
    std::vector<std::string> fields{format_minute(matrix.rows[i])};
    for (const auto& c : matrix.cells[i]) {
      if (!c) {
        fields.emplace_back();
        continue;
      }
      char buf[64];
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, *c);
      fields.emplace_back(buf, p);
    }
    csv::write_row(out, fields);
  }
}

void write_likert_csv(std::ostream& out, const LikertMatrix& matrix) {
  std::vector<std::string> header{"minute"};
  header.insert(header.end(), matrix.columns.begin(), matrix.columns.end());
  csv::write_row(out, header);
  for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
    std::vector<std::string> fields{format_minute(matrix.rows[i])};
    for (const auto& level : matrix.cells[i]) fields.emplace_back(display_name(level));
    csv::write_row(out, fields);
  }
}

}  // namespace ciaf
