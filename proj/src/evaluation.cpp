#include "ciaf/evaluation.hpp"

#include "ciaf/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

namespace ciaf {

namespace {

std::size_t idx(ClassificationLabel c) { return static_cast<std::size_t>(c); }

double ratio(std::size_t num, std::size_t den, bool& undefined) {
  if (den == 0) {
    undefined = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string cell_text(double v, bool undefined) {
  return format_2dp(v) + (undefined ? "*" : "");
}

nlohmann::json metrics_json(const ClassMetrics& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"support", m.support},
          {"precision_undefined", m.precision_undefined},
          {"recall_undefined", m.recall_undefined},
          {"f1_undefined", m.f1_undefined}};
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : cells) {
    for (auto v : row) t += v;
  }
  return t;
}

std::size_t ConfusionMatrix::tp(ClassificationLabel c) const { return cells[idx(c)][idx(c)]; }

std::size_t ConfusionMatrix::fp(ClassificationLabel c) const {
  std::size_t col = 0;
  for (const auto& row : cells) col += row[idx(c)];
  return col - tp(c);
}

std::size_t ConfusionMatrix::fn(ClassificationLabel c) const {
  std::size_t row = 0;
  for (auto v : cells[idx(c)]) row += v;
  return row - tp(c);
}

std::size_t ConfusionMatrix::tn(ClassificationLabel c) const { return total() - tp(c) - fp(c) - fn(c); }

ConfusionMatrix confusion(std::span<const ClassificationLabel> truth, std::span<const ClassificationLabel> predicted) {
  if (truth.size() != predicted.size()) throw LengthMismatch(truth.size(), predicted.size());
  if (truth.empty()) throw EmptyInput("no labels to evaluate", ErrorFamily::Evaluation);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.cells[idx(truth[i])][idx(predicted[i])];
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.total = cm.total();
  r.matrix = cm;
  if (r.total == 0) throw EmptyInput("confusion matrix is empty", ErrorFamily::Evaluation);

  std::size_t diagonal = 0;
  for (auto c : kClasses) {
    ClassMetrics& m = r.per_class[idx(c)];
    const std::size_t tp = cm.tp(c);
    diagonal += tp;
    m.support = tp + cm.fn(c);
    m.precision = ratio(tp, tp + cm.fp(c), m.precision_undefined);
    m.recall = ratio(tp, m.support, m.recall_undefined);
    if (m.precision + m.recall == 0.0) {
      m.f1 = 0.0;
      m.f1_undefined = true;
    } else {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
  }
  r.accuracy = static_cast<double>(diagonal) / static_cast<double>(r.total);

  const double n_classes = static_cast<double>(kClasses.size());
  r.macro_avg.support = r.total;
  r.weighted_avg.support = r.total;
  for (const auto& m : r.per_class) {
    const double w = static_cast<double>(m.support) / static_cast<double>(r.total);
    r.macro_avg.precision += m.precision / n_classes;
    r.macro_avg.recall += m.recall / n_classes;
    r.macro_avg.f1 += m.f1 / n_classes;
    r.weighted_avg.precision += w * m.precision;
    r.weighted_avg.recall += w * m.recall;
    r.weighted_avg.f1 += w * m.f1;
    for (ClassMetrics* avg : {&r.macro_avg, &r.weighted_avg}) {
      avg->precision_undefined |= m.precision_undefined;
      avg->recall_undefined |= m.recall_undefined;
      avg->f1_undefined |= m.f1_undefined;
    }
  }
  return r;
}

std::string format_2dp(double value) {
  // glibc printf rounds the exact binary value using the current rounding
  // mode (round-half-even by default).
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string render_report(const MetricsReport& report, ReportFormat format) {
  if (format == ReportFormat::Json) {
    nlohmann::json j;
    j["classes"] = nlohmann::json::array();
    for (auto c : kClasses) {
      auto m = metrics_json(report.of(c));
      m["class"] = std::string(to_string(c));
      j["classes"].push_back(m);
    }
    j["accuracy"] = report.accuracy;
    j["macro_avg"] = metrics_json(report.macro_avg);
    j["weighted_avg"] = metrics_json(report.weighted_avg);
    j["total"] = report.total;
    j["confusion_matrix"] = {
        {"labels", {"Legit", "Malicious"}},
        {"rows", {{report.matrix.cells[0][0], report.matrix.cells[0][1]},
                  {report.matrix.cells[1][0], report.matrix.cells[1][1]}}}};
    bool degenerate = false;
    for (const auto& m : report.per_class) degenerate |= m.degenerate();
    j["degenerate"] = degenerate;
    return j.dump(2);
  }

  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-14s%10s%10s%10s\n", "Class", "Precision", "Recall", "F1-Score");
  out << line;
  auto row = [&](const char* name, const ClassMetrics& m) {
    std::snprintf(line, sizeof line, "%-14s%10s%10s%10s\n", name, cell_text(m.precision, m.precision_undefined).c_str(),
                  cell_text(m.recall, m.recall_undefined).c_str(), cell_text(m.f1, m.f1_undefined).c_str());
    out << line;
  };
  bool degenerate = false;
  for (auto c : kClasses) {
    row(std::string(to_string(c)).c_str(), report.of(c));
    degenerate |= report.of(c).degenerate();
  }
  std::snprintf(line, sizeof line, "%-14s%10s%10s%10s\n", "Accuracy", "", "", format_2dp(report.accuracy).c_str());
  out << line;
  row("Macro Avg", report.macro_avg);
  row("Weighted Avg", report.weighted_avg);
  if (degenerate) out << "* undefined-degenerate: zero denominator, reported as 0.00\n";
  return out.str();
}

std::string render_macro_row(std::string_view scenario, const MetricsReport& report) {
  return std::string(scenario) + " " + format_2dp(report.macro_avg.precision) + " " +
         format_2dp(report.macro_avg.recall) + " " + format_2dp(report.macro_avg.f1) + " " +
         format_2dp(report.accuracy);
}

}  // namespace ciaf
