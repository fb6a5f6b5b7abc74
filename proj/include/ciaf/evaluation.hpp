#pragma once

#include "ciaf/label.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ciaf {

/// Ordered class list of the binary report: Legit (Normal) first, then Malicious.
inline constexpr std::array<ClassificationLabel, 2> kClasses = {ClassificationLabel::Normal,
                                                               ClassificationLabel::Malicious};

struct ConfusionMatrix {
  /// cells[actual][predicted], indexed in kClasses order.
  std::array<std::array<std::size_t, 2>, 2> cells{};

  std::size_t cell(ClassificationLabel actual, ClassificationLabel predicted) const {
    return cells[static_cast<std::size_t>(actual)][static_cast<std::size_t>(predicted)];
  }
  std::size_t total() const;
  std::size_t tp(ClassificationLabel c) const;
  std::size_t fp(ClassificationLabel c) const;
  std::size_t fn(ClassificationLabel c) const;
  std::size_t tn(ClassificationLabel c) const;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  /// Set when a zero denominator forced a metric to 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;

  bool degenerate() const { return precision_undefined || recall_undefined || f1_undefined; }
};

struct MetricsReport {
  std::array<ClassMetrics, 2> per_class{};  // kClasses order
  double accuracy = 0.0;
  ClassMetrics macro_avg;
  ClassMetrics weighted_avg;
  std::size_t total = 0;
  ConfusionMatrix matrix;

  const ClassMetrics& of(ClassificationLabel c) const { return per_class[static_cast<std::size_t>(c)]; }
};

/// Throws LengthMismatch or EmptyInput.
ConfusionMatrix confusion(std::span<const ClassificationLabel> truth, std::span<const ClassificationLabel> predicted);

/// Precision TP/(TP+FP), recall TP/(TP+FN), F1 as their harmonic mean,
/// accuracy as the diagonal share. A zero denominator yields 0 and sets the
/// matching *_undefined flag. Throws EmptyInput for an empty matrix.
MetricsReport metrics(const ConfusionMatrix& cm);

enum class ReportFormat { Text, Json };

/// Text: a fixed-width classification report with rows Legit, Malicious,
/// Accuracy, Macro Avg, Weighted Avg and 2-decimal half-even values.
/// Json: full precision plus the confusion counts.
std::string render_report(const MetricsReport& report, ReportFormat format);

/// Single scenario-comparison row of macro averages:
/// "<name> <precision> <recall> <f1> <accuracy>".
std::string render_macro_row(std::string_view scenario, const MetricsReport& report);

/// Half-even rounding of the exact binary value to two decimals, e.g. 0.125 -> "0.12".
std::string format_2dp(double value);

}  // namespace ciaf
