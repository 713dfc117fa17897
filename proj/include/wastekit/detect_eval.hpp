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

// Detection metrics in the COCO summary layout: AP@0.50, AP@0.75,
// AP@[0.50:0.95] and AP per object size, all with 101-point interpolation
// unless an 11-point curve is requested.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wastekit/model.hpp"

namespace wastekit {

enum class SizeBucket : std::uint8_t { kSmall, kMedium, kLarge };

inline constexpr double kSmallAreaLimit = 32.0 * 32.0;
inline constexpr double kMediumAreaLimit = 96.0 * 96.0;

/// small < 32^2 <= medium < 96^2 <= large.
SizeBucket bucket(double area);
std::string_view to_string(SizeBucket b);

/// Strictly increasing IoU thresholds in (0, 1].
class IoUThresholds {
 public:
  /// Throws DataError when the list is empty, unsorted or out of range.
  explicit IoUThresholds(std::vector<double> values);

  static IoUThresholds voc50() { return IoUThresholds({0.5}); }
  static IoUThresholds voc75() { return IoUThresholds({0.75}); }
  /// 0.50, 0.55, ..., 0.95.
  static IoUThresholds coco();

  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

double iou(const BBox& a, const BBox& b);

/// Greedy matching within one image and one class. Detections are visited
/// by descending score (ties: lower index first); each takes the unmatched
/// ground truth with the highest IoU >= `iou_threshold` (ties: lower index).
/// Result is indexed like `detections`.
std::vector<std::optional<std::size_t>> match(std::span<const DetectionRecord> detections,
                                              std::span<const AnnotationRecord> ground_truth,
                                              double iou_threshold);

enum class Interpolation : std::uint8_t {
  kCoco101,  // recall points 0.00, 0.01, ..., 1.00
  kVoc11,    // recall points 0.0, 0.1, ..., 1.0
};

/// Pooled AP over every (image, category) pair in the inputs. Returns -1
/// when there is no ground truth.
double average_precision(std::span<const DetectionRecord> detections,
                         std::span<const AnnotationRecord> ground_truth, double iou_threshold,
                         Interpolation interpolation = Interpolation::kCoco101);

/// Which images take part in `evaluate`.
enum class EvalScope : std::uint8_t {
  kAuto,      // test split when any image carries it, otherwise every image
  kTestOnly,
  kAllImages,
};

struct EvalOptions {
  Interpolation interpolation = Interpolation::kCoco101;
  EvalScope scope = EvalScope::kAuto;
  bool collect_curves = false;
};

/// AP values for one slice; -1 marks "no ground truth in this slice".
struct ApFields {
  double map_50_95 = -1;  // mean over the requested thresholds
  double ap_50 = -1;
  double ap_75 = -1;
  double ap_small = -1;
  double ap_medium = -1;
  double ap_large = -1;

  bool operator==(const ApFields&) const = default;
};

/// Interpolated precision at each recall point for one class and threshold.
struct PrCurve {
  std::string category;
  double iou_threshold = 0;
  std::vector<double> recall;
  std::vector<double> precision;
};

struct EvalSummary : ApFields {
  std::vector<double> iou_thresholds;
  std::map<std::string, ApFields> per_class;  // keyed by category name
  std::vector<PrCurve> curves;                // only with collect_curves
};

/// Scores `detections` against the dataset ground truth.
///
/// Overall fields are means over categories that have ground truth in the
/// slice. `map_50_95` and the size fields average over `thresholds`;
/// `ap_50` and `ap_75` are always computed at 0.50 and 0.75. In a size
/// slice, ground truth outside the slice is ignored: detections matched to
/// it, and unmatched detections whose own area is outside the slice, count
/// neither as true nor as false positives. Detections of categories absent
/// from the dataset are not scored.
///
/// Throws DataError for a detection on an unknown image.
EvalSummary evaluate(std::span<const DetectionRecord> detections, const Dataset& dataset,
                     const IoUThresholds& thresholds, const EvalOptions& options = {});

std::vector<DetectionRecord> load_detections(std::string_view text);
std::string emit_detections(std::span<const DetectionRecord> detections);

std::string emit_summary(const EvalSummary& summary);
/// Percent table with the columns mAP@0.50:0.95, mAP@0.50, mAP@0.75,
/// AP_S, AP_M, AP_L; one row for the whole set and one per class.
std::string format_summary_table(const EvalSummary& summary);
/// CSV with header "category,iou_threshold,recall,precision".
std::string format_pr_csv(const EvalSummary& summary);

}  // namespace wastekit
