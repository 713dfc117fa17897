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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wastekit/model.hpp"

namespace wastekit {

/// Concatenates datasets. Images, annotations and categories get fresh ids
/// in input order; categories with the same name are unified. A file name
/// already taken by an earlier image is prefixed with "<source>/".
Dataset merge(std::span<const Dataset> datasets);

enum class StratifyBy : std::uint8_t { kCategory, kSourceDataset, kNone };

std::optional<StratifyBy> parse_stratify(std::string_view name);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  StratifyBy stratify_by = StratifyBy::kCategory;
};

/// Stratum label of an image under `by`. With kCategory an image belongs to
/// its most frequent annotation category (ties: lowest id); images without
/// annotations share the stratum "<none>".
std::string stratum_of(const Dataset& dataset, const ImageRecord& image, StratifyBy by);

/// Train count for a stratum: round-half-up of fraction * size, at least 1
/// for a non-empty stratum.
std::size_t train_quota(double train_fraction, std::size_t stratum_size);

/// Assigns train/test to every image. Inside a stratum images are ranked by
/// a seeded hash of their id, so the result depends only on (seed, ids),
/// never on input order. Throws DataError when the fraction is outside (0, 1).
Dataset split(const Dataset& dataset, const SplitSpec& spec);

struct Counts {
  std::int64_t images = 0;
  std::int64_t annotations = 0;

  bool operator==(const Counts&) const = default;
};

struct DatasetStats {
  std::int64_t images = 0;
  std::int64_t annotations = 0;
  std::int64_t categories = 0;
  std::int64_t pseudo_annotations = 0;
  std::map<std::string, Counts> per_source;
  std::map<std::string, Counts> per_class;  // images = images containing the class
  std::map<std::string, Counts> per_split;
  std::int64_t small = 0;
  std::int64_t medium = 0;
  std::int64_t large = 0;

  bool operator==(const DatasetStats&) const = default;
};

DatasetStats stats(const Dataset& dataset);
std::string emit_stats(const DatasetStats& s);
std::string format_stats_table(const DatasetStats& s);

struct CropRecord {
  Id crop_id = 0;
  Id image_id = 0;
  BBox region;
  std::optional<Id> source_annotation_id;
  double margin_fraction = 0;

  bool operator==(const CropRecord&) const = default;
};

/// Grows `box` by margin_fraction * max(w, h) on every side, then clamps.
BBox expand_region(const BBox& box, double margin_fraction, double width, double height);

/// One crop per ground-truth annotation. crop_id is the 1-based position of
/// the annotation in `dataset.annotations`. Zero-area regions are dropped
/// with a warning. Throws DataError for a negative margin.
std::vector<CropRecord> crop_manifest(const Dataset& dataset, double margin_fraction,
                                      Warnings* warnings = nullptr);

/// One crop per detection; crop_id is the 1-based position in `detections`.
/// Image sizes come from `images`.
std::vector<CropRecord> crop_manifest(std::span<const DetectionRecord> detections,
                                      const Dataset& images, double margin_fraction,
                                      Warnings* warnings = nullptr);

std::string emit_crop_manifest(std::span<const CropRecord> crops);
std::vector<CropRecord> load_crop_manifest(std::string_view text);

struct ComposedDetection {
  DetectionRecord detection;
  std::optional<TargetClass> label;     // unset: not classified, stays "litter"
  std::optional<double> class_score;
};

/// Relabels stage-1 detections with stage-2 predictions. Crops link to
/// detections by position (crop_id = index + 1). Background predictions drop
/// the detection; unclassified ones get category kLitterCategoryId. Boxes
/// and detector scores are never changed.
///
/// Throws DataError on an unknown crop_id, a crop without its detection,
/// or two predictions for one crop.
std::vector<ComposedDetection> compose_two_stage(std::span<const DetectionRecord> detections,
                                                 std::span<const CropRecord> crops,
                                                 std::span<const ClassPrediction> predictions);

std::vector<DetectionRecord> detections_of(std::span<const ComposedDetection> composed);

}  // namespace wastekit
