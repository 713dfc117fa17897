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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wastekit/model.hpp"

namespace wastekit {

/// counts[i][j] = items of true class classes[i] predicted as classes[j].
struct ConfusionMatrix {
  std::vector<TargetClass> classes;
  std::vector<std::vector<std::int64_t>> counts;

  std::int64_t total() const;
  std::int64_t row_sum(std::size_t i) const;
  std::int64_t column_sum(std::size_t j) const;

  bool operator==(const ConfusionMatrix&) const = default;
};

/// Builds the matrix over `classes` (all eight target classes by default).
/// Throws DataError on length mismatch or a label outside `classes`.
ConfusionMatrix confusion(std::span<const TargetClass> truth, std::span<const TargetClass> predicted,
                          std::span<const TargetClass> classes = kAllTargetClasses);

struct ClassMetrics {
  TargetClass label = TargetClass::kUnknown;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::int64_t support = 0;
  bool zero_support = false;  // no true items; metrics forced to 0
};

struct ClassReport {
  std::vector<ClassMetrics> per_class;  // same order as the matrix classes
  double accuracy = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  std::int64_t total = 0;
};

/// 2pr / (p + r), or 0 when p + r == 0.
double f1_score(double precision, double recall);

ClassReport report(const ConfusionMatrix& matrix);

/// Half-away-from-zero rounding used for every displayed metric.
double round_to(double value, int decimals);

std::string emit_report(const ClassReport& report, const ConfusionMatrix& matrix);
/// Columns "Class name, Precision, Recall, F1-score, Support" with two
/// decimals, followed by accuracy and macro averages.
std::string format_report_table(const ClassReport& report);

/// [{"crop_id", "label", "score"}]. Ground-truth files carry no score; pass
/// `require_score = false` to read them.
std::vector<ClassPrediction> load_class_predictions(std::string_view text, bool require_score = true);
std::string emit_class_predictions(std::span<const ClassPrediction> predictions);

}  // namespace wastekit
