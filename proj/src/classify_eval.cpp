/* Copyright 2026 The Wastekit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "wastekit/classify_eval.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json_util.hpp"

namespace wastekit {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts) {
    for (auto c : row) t += c;
  }
  return t;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t i) const {
  std::int64_t t = 0;
  for (auto c : counts[i]) t += c;
  return t;
}

std::int64_t ConfusionMatrix::column_sum(std::size_t j) const {
  std::int64_t t = 0;
  for (const auto& row : counts) t += row[j];
  return t;
}

ConfusionMatrix confusion(std::span<const TargetClass> truth, std::span<const TargetClass> predicted,
                          std::span<const TargetClass> classes) {
  if (truth.size() != predicted.size()) {
    throw DataError("truth has " + std::to_string(truth.size()) + " labels but predictions have " +
                    std::to_string(predicted.size()));
  }
  ConfusionMatrix m;
  m.classes.assign(classes.begin(), classes.end());
  m.counts.assign(classes.size(), std::vector<std::int64_t>(classes.size(), 0));

  std::array<int, kAllTargetClasses.size()> index;
  index.fill(-1);
  for (std::size_t i = 0; i < classes.size(); ++i) index[static_cast<std::size_t>(classes[i])] = static_cast<int>(i);
  auto slot = [&](TargetClass c) {
    const int k = index[static_cast<std::size_t>(c)];
    if (k < 0) throw DataError("label '" + std::string(to_string(c)) + "' is not an evaluated class");
    return static_cast<std::size_t>(k);
  };
  for (std::size_t n = 0; n < truth.size(); ++n) ++m.counts[slot(truth[n])][slot(predicted[n])];
  return m;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0 ? 2 * precision * recall / s : 0.0;
}

ClassReport report(const ConfusionMatrix& matrix) {
  ClassReport r;
  r.total = matrix.total();
  std::int64_t trace = 0;
  double sum_p = 0;
  double sum_r = 0;
  double sum_f = 0;
  std::size_t supported = 0;
  for (std::size_t i = 0; i < matrix.classes.size(); ++i) {
    ClassMetrics m;
    m.label = matrix.classes[i];
    const auto tp = matrix.counts[i][i];
    trace += tp;
    m.support = matrix.row_sum(i);
    const auto predicted = matrix.column_sum(i);
    m.zero_support = m.support == 0;
    if (!m.zero_support) {
      m.precision = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
      m.recall = static_cast<double>(tp) / static_cast<double>(m.support);
      m.f1 = f1_score(m.precision, m.recall);
      sum_p += m.precision;
      sum_r += m.recall;
      sum_f += m.f1;
      ++supported;
    }
    r.per_class.push_back(m);
  }
  r.accuracy = r.total > 0 ? static_cast<double>(trace) / static_cast<double>(r.total) : 0.0;
  // Macro averages skip zero-support classes; those are flagged instead.
  if (supported > 0) {
    r.macro_precision = sum_p / static_cast<double>(supported);
    r.macro_recall = sum_r / static_cast<double>(supported);
    r.macro_f1 = sum_f / static_cast<double>(supported);
  }
  return r;
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

std::string emit_report(const ClassReport& report, const ConfusionMatrix& matrix) {
  using detail::json;
  json per_class = json::array();
  for (const auto& m : report.per_class) {
    per_class.push_back({{"label", std::string(to_string(m.label))},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"support", m.support},
                         {"zero_support", m.zero_support}});
  }
  json classes = json::array();
  for (auto c : matrix.classes) classes.push_back(std::string(to_string(c)));
  json doc = {{"accuracy", report.accuracy},
              {"total", report.total},
              {"macro", {{"precision", report.macro_precision},
                         {"recall", report.macro_recall},
                         {"f1", report.macro_f1}}},
              {"per_class", std::move(per_class)},
              {"confusion", {{"classes", std::move(classes)}, {"counts", matrix.counts}}}};
  return detail::dump_json(doc);
}

std::string format_report_table(const ClassReport& report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %9s %7s %9s %8s\n", "Class name", "Precision", "Recall",
                "F1-score", "Support");
  os << line;
  for (const auto& m : report.per_class) {
    std::snprintf(line, sizeof line, "%-20s %9.2f %7.2f %9.2f %8lld%s\n",
                  std::string(to_string(m.label)).c_str(), round_to(m.precision, 2),
                  round_to(m.recall, 2), round_to(m.f1, 2), static_cast<long long>(m.support),
                  m.zero_support ? "  (no support)" : "");
    os << line;
  }
  std::snprintf(line, sizeof line, "\n%-20s %9.2f %7.2f %9.2f %8lld\n", "macro avg",
                round_to(report.macro_precision, 2), round_to(report.macro_recall, 2),
                round_to(report.macro_f1, 2), static_cast<long long>(report.total));
  os << line;
  std::snprintf(line, sizeof line, "%-20s %27.2f %8lld\n", "accuracy", round_to(report.accuracy, 2),
                static_cast<long long>(report.total));
  os << line;
  return os.str();
}

std::vector<ClassPrediction> load_class_predictions(std::string_view text, bool require_score) {
  const auto doc = detail::parse_json(text);
  if (!doc.is_array()) throw SchemaError("", "classification file must be a JSON array");
  std::vector<ClassPrediction> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto path = detail::index_path("", i);
    ClassPrediction p;
    p.crop_id = detail::require_int(doc[i], "crop_id", path);
    p.label = detail::parse_label(detail::require(doc[i], "label", path), path + ".label");
    if (require_score) {
      p.score = detail::require_number(doc[i], "score", path);
      if (!(p.score >= 0.0 && p.score <= 1.0)) {
        throw SchemaError(path + ".score", "score outside [0, 1] at " + path);
      }
    } else {
      p.score = 1.0;
    }
    out.push_back(p);
  }
  return out;
}

std::string emit_class_predictions(std::span<const ClassPrediction> predictions) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& p : predictions) {
    nlohmann::ordered_json rec;
    rec["crop_id"] = p.crop_id;
    rec["label"] = std::string(to_string(p.label));
    rec["score"] = p.score;
    doc.push_back(std::move(rec));
  }
  return doc.dump(2) + "\n";
}

}  // namespace wastekit
