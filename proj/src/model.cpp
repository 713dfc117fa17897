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

#include "wastekit/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace wastekit {
namespace {

// Slack for bounds checks on boxes that went through a YOLO fraction round
// trip.
constexpr double kBoundsSlack = 1e-9;

constexpr std::array<std::string_view, 8> kTargetNames = {
    "bio", "glass", "metals_and_plastic", "non_recyclable",
    "other", "paper", "unknown", "background"};

}  // namespace

std::string_view to_string(TargetClass c) {
  return kTargetNames[static_cast<std::size_t>(c)];
}

std::optional<TargetClass> parse_target_class(std::string_view name) {
  for (std::size_t i = 0; i < kTargetNames.size(); ++i) {
    if (kTargetNames[i] == name) return static_cast<TargetClass>(i);
  }
  return std::nullopt;
}

std::optional<TargetClass> target_class_from_id(std::int64_t id) {
  if (id < 1 || id > static_cast<std::int64_t>(kAllTargetClasses.size())) {
    return std::nullopt;
  }
  return static_cast<TargetClass>(id - 1);
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kTest:
      return "test";
    case Split::kUnassigned:
      break;
  }
  return "unassigned";
}

std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  if (name == "unassigned") return Split::kUnassigned;
  return std::nullopt;
}

BBox clamp_to_image(const BBox& box, double width, double height) {
  // Recomputing w as x1 - x0 perturbs in-frame boxes by an ulp.
  if (box.x >= 0 && box.y >= 0 && box.w >= 0 && box.h >= 0 && box.right() <= width && box.bottom() <= height) {
    return box;
  }
  const double x0 = std::clamp(box.x, 0.0, width);
  const double y0 = std::clamp(box.y, 0.0, height);
  const double x1 = std::clamp(box.x + box.w, 0.0, width);
  const double y1 = std::clamp(box.y + box.h, 0.0, height);
  return {x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
}

std::vector<Violation> validate(const Dataset& dataset) {
  std::vector<Violation> out;

  std::unordered_set<Id> category_ids;
  for (const auto& c : dataset.categories) {
    if (c.id < 1) out.push_back({"category", c.id, "invalid id"});
    if (!category_ids.insert(c.id).second) out.push_back({"category", c.id, "duplicate id"});
    if (c.name.empty()) out.push_back({"category", c.id, "empty name"});
  }

  std::unordered_map<Id, const ImageRecord*> images;
  for (const auto& im : dataset.images) {
    if (im.id < 1) out.push_back({"image", im.id, "invalid id"});
    if (!images.emplace(im.id, &im).second) out.push_back({"image", im.id, "duplicate id"});
    if (im.width <= 0 || im.height <= 0) {
      out.push_back({"image", im.id, "non-positive dimensions"});
    }
  }

  std::unordered_set<Id> annotation_ids;
  for (const auto& a : dataset.annotations) {
    if (a.id < 1) out.push_back({"annotation", a.id, "invalid id"});
    if (!annotation_ids.insert(a.id).second) out.push_back({"annotation", a.id, "duplicate id"});
    if (!category_ids.contains(a.category_id)) {
      out.push_back({"annotation", a.id, "dangling category_id"});
    }
    const auto& b = a.bbox;
    if (!std::isfinite(b.x) || !std::isfinite(b.y) || !std::isfinite(b.w) ||
        !std::isfinite(b.h) || !std::isfinite(a.area)) {
      out.push_back({"annotation", a.id, "non-finite bbox"});
      continue;
    }
    if (b.w < 0 || b.h < 0) out.push_back({"annotation", a.id, "negative bbox size"});
    if (!(a.area > 0) || !(b.area() > 0)) out.push_back({"annotation", a.id, "zero-area"});

    auto it = images.find(a.image_id);
    if (it == images.end()) {
      out.push_back({"annotation", a.id, "dangling image_id"});
      continue;
    }
    const auto& im = *it->second;
    if (b.x < -kBoundsSlack || b.y < -kBoundsSlack ||
        b.right() > static_cast<double>(im.width) + kBoundsSlack ||
        b.bottom() > static_cast<double>(im.height) + kBoundsSlack) {
      out.push_back({"annotation", a.id, "bbox out of bounds"});
    }
  }
  return out;
}

}  // namespace wastekit
