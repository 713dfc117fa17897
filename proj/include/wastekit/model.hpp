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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wastekit/target_class.hpp"

namespace wastekit {

using Id = std::int64_t;

/// Axis-aligned box in absolute pixels, (x, y) is the top-left corner.
struct BBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }

  bool operator==(const BBox&) const = default;
};

/// Intersects `box` with [0, width] x [0, height]. Boxes fully outside
/// collapse to zero width and/or height at the nearest edge.
BBox clamp_to_image(const BBox& box, double width, double height);

enum class Split : std::uint8_t { kUnassigned, kTrain, kTest };

std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view name);

struct CategoryDef {
  Id id = 0;
  std::string name;
  std::string source_dataset;

  bool operator==(const CategoryDef&) const = default;
};

struct ImageRecord {
  Id id = 0;
  std::string file_name;
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::string source_dataset;
  Split split = Split::kUnassigned;

  bool operator==(const ImageRecord&) const = default;
};

struct AnnotationRecord {
  Id id = 0;
  Id image_id = 0;
  Id category_id = 0;
  BBox bbox;
  double area = 0;
  std::string source_dataset;
  bool is_pseudo = false;

  bool operator==(const AnnotationRecord&) const = default;
};

struct Dataset {
  std::vector<ImageRecord> images;
  std::vector<AnnotationRecord> annotations;
  std::vector<CategoryDef> categories;
  std::vector<std::string> provenance;

  bool empty() const { return images.empty() && annotations.empty() && categories.empty(); }

  bool operator==(const Dataset&) const = default;
};

/// Stage-1 model output in COCO results layout.
struct DetectionRecord {
  Id image_id = 0;
  Id category_id = 0;
  BBox bbox;
  double score = 0;

  bool operator==(const DetectionRecord&) const = default;
};

/// Stage-2 model output for one crop.
struct ClassPrediction {
  Id crop_id = 0;
  TargetClass label = TargetClass::kUnknown;
  double score = 0;

  bool operator==(const ClassPrediction&) const = default;
};

/// One broken invariant. `record` is "image", "annotation", "category" or
/// "dataset"; `rule` is a short fixed phrase such as "dangling image_id".
struct Violation {
  std::string record;
  Id id = 0;
  std::string rule;

  bool operator==(const Violation&) const = default;
};

/// Checks every dataset invariant. Never throws; an empty result means the
/// dataset is well formed.
std::vector<Violation> validate(const Dataset& dataset);

/// Accumulates recoverable problems (clamped boxes, dropped crops).
using Warnings = std::vector<std::string>;

}  // namespace wastekit
