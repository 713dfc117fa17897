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

#include "wastekit/detect_eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json_util.hpp"

namespace wastekit {
namespace {

using detail::json;

enum class Status : std::uint8_t { kFalsePositive, kTruePositive, kIgnored };

struct AreaRange {
  double lo;
  double hi;
  bool contains(double area) const { return area >= lo && area < hi; }
};

constexpr double kInf = std::numeric_limits<double>::infinity();
// Index 0 is the unrestricted slice, 1..3 follow SizeBucket.
constexpr std::array<AreaRange, 4> kAreaRanges = {{
    {0.0, kInf},
    {0.0, kSmallAreaLimit},
    {kSmallAreaLimit, kMediumAreaLimit},
    {kMediumAreaLimit, kInf},
}};

std::vector<double> recall_points(Interpolation interpolation) {
  const int steps = interpolation == Interpolation::kCoco101 ? 100 : 10;
  std::vector<double> r(steps + 1);
  for (int k = 0; k <= steps; ++k) r[k] = static_cast<double>(k) / steps;
  return r;
}

// Greedy assignment over a precomputed IoU matrix whose rows are already in
// processing order. Non-ignored ground truth is preferred; a detection that
// can only reach ignored ground truth is itself ignored.
void greedy_match(std::span<const double> ious, std::size_t n_det, std::size_t n_gt,
                  const std::vector<char>& gt_ignored, const std::vector<char>& det_outside,
                  double threshold, std::vector<char>& gt_taken, Status* status,
                  std::ptrdiff_t* matched) {
  gt_taken.assign(n_gt, 0);
  for (std::size_t d = 0; d < n_det; ++d) {
    const double* row = ious.data() + d * n_gt;
    std::ptrdiff_t best = -1;
    bool best_ignored = true;
    double best_iou = 0;
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (gt_taken[g] || row[g] < threshold) continue;
      const bool ignored = gt_ignored[g] != 0;
      if (best >= 0) {
        // Never trade a regular match for an ignored one.
        if (ignored && !best_ignored) continue;
        if (ignored == best_ignored && row[g] <= best_iou) continue;
      }
      best = static_cast<std::ptrdiff_t>(g);
      best_ignored = ignored;
      best_iou = row[g];
    }
    if (best >= 0) {
      gt_taken[static_cast<std::size_t>(best)] = 1;
      status[d] = best_ignored ? Status::kIgnored : Status::kTruePositive;
    } else {
      status[d] = det_outside[d] ? Status::kIgnored : Status::kFalsePositive;
    }
    if (matched != nullptr) matched[d] = best;
  }
}

// Interpolated precision at each recall point; statuses are in global
// score order.
std::vector<double> interpolated_precision(std::span<const Status> statuses, std::size_t n_gt,
                                           const std::vector<double>& points) {
  std::vector<double> recall;
  std::vector<double> precision;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (const auto s : statuses) {
    if (s == Status::kIgnored) continue;
    (s == Status::kTruePositive ? tp : fp) += 1;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  std::vector<double> q(points.size(), 0.0);
  for (std::size_t k = 0; k < points.size(); ++k) {
    auto it = std::lower_bound(recall.begin(), recall.end(), points[k]);
    if (it == recall.end()) break;
    q[k] = precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return q;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double ap_from_statuses(std::span<const Status> statuses, std::size_t n_gt,
                        const std::vector<double>& points) {
  if (n_gt == 0) return -1;
  return mean(interpolated_precision(statuses, n_gt, points));
}

// Descending score, ties by ascending index.
template <typename GetScore>
std::vector<std::size_t> score_order(std::size_t n, GetScore score) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score(a) > score(b); });
  return order;
}

// Mean of the non-sentinel entries, -1 when there are none.
double mean_present(const std::vector<double>& values) {
  double sum = 0;
  std::size_t n = 0;
  for (double v : values) {
    if (v < 0) continue;
    sum += v;
    ++n;
  }
  return n == 0 ? -1 : sum / static_cast<double>(n);
}

std::string percent(double v) {
  if (v < 0) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
  return buf;
}

json fields_json(const ApFields& f) {
  return {{"map_50_95", f.map_50_95}, {"ap_50", f.ap_50},         {"ap_75", f.ap_75},
          {"ap_small", f.ap_small},   {"ap_medium", f.ap_medium}, {"ap_large", f.ap_large}};
}

}  // namespace

SizeBucket bucket(double area) {
  if (area < kSmallAreaLimit) return SizeBucket::kSmall;
  if (area < kMediumAreaLimit) return SizeBucket::kMedium;
  return SizeBucket::kLarge;
}

std::string_view to_string(SizeBucket b) {
  switch (b) {
    case SizeBucket::kSmall:
      return "small";
    case SizeBucket::kMedium:
      return "medium";
    case SizeBucket::kLarge:
      break;
  }
  return "large";
}

IoUThresholds::IoUThresholds(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DataError("IoU threshold list is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0 && values_[i] <= 1.0)) {
      throw DataError("IoU threshold " + std::to_string(values_[i]) + " outside (0, 1]");
    }
    if (i > 0 && !(values_[i] > values_[i - 1])) {
      throw DataError("IoU thresholds must be strictly increasing");
    }
  }
}

IoUThresholds IoUThresholds::coco() {
  std::vector<double> v;
  for (int k = 0; k < 10; ++k) v.push_back(static_cast<double>(50 + 5 * k) / 100.0);
  return IoUThresholds(std::move(v));
}

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return std::min(1.0, inter / uni);
}

std::vector<std::optional<std::size_t>> match(std::span<const DetectionRecord> detections,
                                              std::span<const AnnotationRecord> ground_truth,
                                              double iou_threshold) {
  const auto order = score_order(detections.size(), [&](std::size_t i) { return detections[i].score; });
  const std::size_t n_gt = ground_truth.size();
  std::vector<double> ious(order.size() * n_gt);
  for (std::size_t r = 0; r < order.size(); ++r) {
    for (std::size_t g = 0; g < n_gt; ++g) {
      ious[r * n_gt + g] = iou(detections[order[r]].bbox, ground_truth[g].bbox);
    }
  }
  std::vector<Status> status(order.size());
  std::vector<std::ptrdiff_t> matched(order.size());
  std::vector<char> taken;
  greedy_match(ious, order.size(), n_gt, std::vector<char>(n_gt, 0),
               std::vector<char>(order.size(), 0), iou_threshold, taken, status.data(),
               matched.data());

  std::vector<std::optional<std::size_t>> out(detections.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (matched[r] >= 0) out[order[r]] = static_cast<std::size_t>(matched[r]);
  }
  return out;
}

double average_precision(std::span<const DetectionRecord> detections,
                         std::span<const AnnotationRecord> ground_truth, double iou_threshold,
                         Interpolation interpolation) {
  if (ground_truth.empty()) return -1;
  const auto order = score_order(detections.size(), [&](std::size_t i) { return detections[i].score; });

  // Slice key: (image, category).
  struct Slice {
    std::vector<std::size_t> ranks;
    std::vector<std::size_t> gts;
  };
  std::map<std::pair<Id, Id>, Slice> slices;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& d = detections[order[r]];
    slices[{d.image_id, d.category_id}].ranks.push_back(r);
  }
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    slices[{ground_truth[g].image_id, ground_truth[g].category_id}].gts.push_back(g);
  }

  std::vector<Status> status(order.size(), Status::kFalsePositive);
  std::vector<double> ious;
  std::vector<Status> local;
  std::vector<char> taken;
  for (const auto& [key, s] : slices) {
    if (s.ranks.empty()) continue;
    ious.assign(s.ranks.size() * s.gts.size(), 0.0);
    for (std::size_t i = 0; i < s.ranks.size(); ++i) {
      for (std::size_t j = 0; j < s.gts.size(); ++j) {
        ious[i * s.gts.size() + j] =
            iou(detections[order[s.ranks[i]]].bbox, ground_truth[s.gts[j]].bbox);
      }
    }
    local.resize(s.ranks.size());
    greedy_match(ious, s.ranks.size(), s.gts.size(), std::vector<char>(s.gts.size(), 0),
                 std::vector<char>(s.ranks.size(), 0), iou_threshold, taken, local.data(),
                 nullptr);
    for (std::size_t i = 0; i < s.ranks.size(); ++i) status[s.ranks[i]] = local[i];
  }
  return ap_from_statuses(status, ground_truth.size(), recall_points(interpolation));
}

EvalSummary evaluate(std::span<const DetectionRecord> detections, const Dataset& dataset,
                     const IoUThresholds& thresholds, const EvalOptions& options) {
  std::unordered_map<Id, const ImageRecord*> images;
  bool any_test = false;
  for (const auto& im : dataset.images) {
    images.emplace(im.id, &im);
    any_test = any_test || im.split == Split::kTest;
  }
  const bool test_only = options.scope == EvalScope::kTestOnly ||
                         (options.scope == EvalScope::kAuto && any_test);
  auto in_scope = [&](Id image_id) {
    return !test_only || images.at(image_id)->split == Split::kTest;
  };
  for (const auto& d : detections) {
    if (!images.contains(d.image_id)) {
      throw DataError("detection references unknown image id " + std::to_string(d.image_id));
    }
  }

  // Thresholds actually evaluated: requested ones plus 0.50 and 0.75.
  std::vector<double> eval_t = thresholds.values();
  for (double extra : {0.5, 0.75}) {
    if (std::find(eval_t.begin(), eval_t.end(), extra) == eval_t.end()) eval_t.push_back(extra);
  }
  const std::size_t n_req = thresholds.values().size();
  const std::size_t t50 = static_cast<std::size_t>(
      std::find(eval_t.begin(), eval_t.end(), 0.5) - eval_t.begin());
  const std::size_t t75 = static_cast<std::size_t>(
      std::find(eval_t.begin(), eval_t.end(), 0.75) - eval_t.begin());
  const auto points = recall_points(options.interpolation);

  EvalSummary summary;
  summary.iou_thresholds = thresholds.values();

  std::unordered_map<Id, std::vector<std::size_t>> dets_by_cat;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (in_scope(detections[i].image_id)) dets_by_cat[detections[i].category_id].push_back(i);
  }
  std::unordered_map<Id, std::vector<std::size_t>> gts_by_cat;
  for (std::size_t i = 0; i < dataset.annotations.size(); ++i) {
    const auto& a = dataset.annotations[i];
    auto im = images.find(a.image_id);
    if (im == images.end() || (test_only && im->second->split != Split::kTest)) continue;
    gts_by_cat[a.category_id].push_back(i);
  }

  std::array<std::vector<double>, 6> class_values;  // one entry per class, per field
  std::vector<char> taken;
  std::vector<char> gt_ignored;
  std::vector<char> det_outside;
  std::vector<double> ious;
  std::vector<Status> local;

  for (const auto& category : dataset.categories) {
    const auto& cat_dets = dets_by_cat[category.id];
    const auto& cat_gts = gts_by_cat[category.id];
    const auto order = score_order(cat_dets.size(),
                                   [&](std::size_t i) { return detections[cat_dets[i]].score; });

    struct Slice {
      std::vector<std::size_t> ranks;
      std::vector<std::size_t> gts;  // indices into dataset.annotations
    };
    std::map<Id, Slice> slices;
    for (std::size_t r = 0; r < order.size(); ++r) {
      slices[detections[cat_dets[order[r]]].image_id].ranks.push_back(r);
    }
    for (auto g : cat_gts) slices[dataset.annotations[g].image_id].gts.push_back(g);

    std::array<std::size_t, 4> n_gt{};
    for (auto g : cat_gts) {
      for (std::size_t a = 0; a < kAreaRanges.size(); ++a) {
        n_gt[a] += kAreaRanges[a].contains(dataset.annotations[g].area) ? 1 : 0;
      }
    }

    // status[t][a] holds one entry per detection rank.
    std::vector<std::array<std::vector<Status>, 4>> status(eval_t.size());
    for (auto& per_t : status) {
      for (auto& v : per_t) v.assign(order.size(), Status::kFalsePositive);
    }

    for (const auto& [image_id, s] : slices) {
      if (s.ranks.empty()) continue;
      const std::size_t nd = s.ranks.size();
      const std::size_t ng = s.gts.size();
      ious.assign(nd * ng, 0.0);
      for (std::size_t i = 0; i < nd; ++i) {
        const auto& box = detections[cat_dets[order[s.ranks[i]]]].bbox;
        for (std::size_t j = 0; j < ng; ++j) {
          ious[i * ng + j] = iou(box, dataset.annotations[s.gts[j]].bbox);
        }
      }
      local.resize(nd);
      for (std::size_t a = 0; a < kAreaRanges.size(); ++a) {
        gt_ignored.resize(ng);
        for (std::size_t j = 0; j < ng; ++j) {
          gt_ignored[j] = kAreaRanges[a].contains(dataset.annotations[s.gts[j]].area) ? 0 : 1;
        }
        det_outside.resize(nd);
        for (std::size_t i = 0; i < nd; ++i) {
          det_outside[i] =
              kAreaRanges[a].contains(detections[cat_dets[order[s.ranks[i]]]].bbox.area()) ? 0 : 1;
        }
        for (std::size_t t = 0; t < eval_t.size(); ++t) {
          greedy_match(ious, nd, ng, gt_ignored, det_outside, eval_t[t], taken, local.data(),
                       nullptr);
          for (std::size_t i = 0; i < nd; ++i) status[t][a][s.ranks[i]] = local[i];
        }
      }
    }

    std::vector<std::array<double, 4>> ap(eval_t.size());
    for (std::size_t t = 0; t < eval_t.size(); ++t) {
      for (std::size_t a = 0; a < kAreaRanges.size(); ++a) {
        ap[t][a] = ap_from_statuses(status[t][a], n_gt[a], points);
      }
    }
    auto over_requested = [&](std::size_t a) {
      if (n_gt[a] == 0) return -1.0;
      double sum = 0;
      for (std::size_t t = 0; t < n_req; ++t) sum += ap[t][a];
      return sum / static_cast<double>(n_req);
    };

    ApFields f;
    f.map_50_95 = over_requested(0);
    f.ap_50 = ap[t50][0];
    f.ap_75 = ap[t75][0];
    f.ap_small = over_requested(1);
    f.ap_medium = over_requested(2);
    f.ap_large = over_requested(3);
    summary.per_class[category.name] = f;

    class_values[0].push_back(f.map_50_95);
    class_values[1].push_back(f.ap_50);
    class_values[2].push_back(f.ap_75);
    class_values[3].push_back(f.ap_small);
    class_values[4].push_back(f.ap_medium);
    class_values[5].push_back(f.ap_large);

    if (options.collect_curves && n_gt[0] > 0) {
      for (std::size_t t = 0; t < n_req; ++t) {
        summary.curves.push_back({category.name, eval_t[t], points,
                                  interpolated_precision(status[t][0], n_gt[0], points)});
      }
    }
  }

  summary.map_50_95 = mean_present(class_values[0]);
  summary.ap_50 = mean_present(class_values[1]);
  summary.ap_75 = mean_present(class_values[2]);
  summary.ap_small = mean_present(class_values[3]);
  summary.ap_medium = mean_present(class_values[4]);
  summary.ap_large = mean_present(class_values[5]);
  return summary;
}

std::vector<DetectionRecord> load_detections(std::string_view text) {
  const json doc = detail::parse_json(text);
  if (!doc.is_array()) throw SchemaError("", "detection file must be a JSON array");
  std::vector<DetectionRecord> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto path = detail::index_path("", i);
    DetectionRecord d;
    d.image_id = detail::require_int(doc[i], "image_id", path);
    d.category_id = detail::require_int(doc[i], "category_id", path);
    d.bbox = detail::parse_bbox(detail::require(doc[i], "bbox", path), path + ".bbox");
    d.score = detail::require_number(doc[i], "score", path);
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw SchemaError(path + ".score", "score outside [0, 1] at " + path);
    }
    if (d.bbox.w < 0 || d.bbox.h < 0) {
      throw SchemaError(path + ".bbox", "negative box size at " + path);
    }
    out.push_back(d);
  }
  return out;
}

std::string emit_detections(std::span<const DetectionRecord> detections) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& d : detections) {
    nlohmann::ordered_json rec;
    rec["image_id"] = d.image_id;
    rec["category_id"] = d.category_id;
    rec["bbox"] = {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h};
    rec["score"] = d.score;
    doc.push_back(std::move(rec));
  }
  return doc.dump(2) + "\n";
}

std::string emit_summary(const EvalSummary& summary) {
  json doc = fields_json(summary);
  doc["iou_thresholds"] = summary.iou_thresholds;
  json per_class = json::object();
  for (const auto& [name, f] : summary.per_class) per_class[name] = fields_json(f);
  doc["per_class"] = std::move(per_class);
  return detail::dump_json(doc);
}

std::string format_summary_table(const EvalSummary& summary) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %14s %9s %9s %6s %6s %6s\n", "Slice", "mAP@0.50:0.95",
                "mAP@0.50", "mAP@0.75", "AP_S", "AP_M", "AP_L");
  os << line;
  auto row = [&](const std::string& name, const ApFields& f) {
    std::snprintf(line, sizeof line, "%-22s %14s %9s %9s %6s %6s %6s\n", name.c_str(),
                  percent(f.map_50_95).c_str(), percent(f.ap_50).c_str(),
                  percent(f.ap_75).c_str(), percent(f.ap_small).c_str(),
                  percent(f.ap_medium).c_str(), percent(f.ap_large).c_str());
    os << line;
  };
  row("all", summary);
  for (const auto& [name, f] : summary.per_class) row(name, f);
  return os.str();
}

std::string format_pr_csv(const EvalSummary& summary) {
  std::ostringstream os;
  os << "category,iou_threshold,recall,precision\n";
  char line[256];
  for (const auto& c : summary.curves) {
    for (std::size_t k = 0; k < c.recall.size(); ++k) {
      std::snprintf(line, sizeof line, "%s,%.2f,%.2f,%.17g\n", c.category.c_str(),
                    c.iou_threshold, c.recall[k], c.precision[k]);
      os << line;
    }
  }
  return os.str();
}

}  // namespace wastekit
