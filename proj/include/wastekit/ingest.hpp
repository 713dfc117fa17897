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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wastekit/model.hpp"

namespace wastekit {

enum class SourceFormat : std::uint8_t { kCocoJson, kYoloTxt, kLabelDirs };

struct ImageSize {
  std::int64_t width = 0;
  std::int64_t height = 0;
};

/// Parses a COCO detection/instance document. Segmentation is dropped; when
/// an annotation has no `bbox` but a polygon segmentation, the box is derived
/// from the polygon extent. Out-of-bounds boxes are clamped and reported in
/// `warnings`.
///
/// Throws ParseError on malformed JSON and SchemaError on missing fields or
/// dangling references.
Dataset ingest_coco(std::string_view json_document, std::string_view source_name,
                    Warnings* warnings = nullptr);

/// Converts YOLO label files (keyed by image file name) to absolute boxes.
/// Every file in `label_files` needs an entry in `image_dims`; images present
/// only in `image_dims` become images without annotations. Categories are
/// `class_names` in order, ids starting at 1.
Dataset ingest_yolo(const std::map<std::string, std::string>& label_files,
                    const std::map<std::string, ImageSize>& image_dims,
                    const std::vector<std::string>& class_names, std::string_view source_name,
                    Warnings* warnings = nullptr);

/// One full-image annotation per (class, file) pair.
Dataset ingest_label_dirs(const std::map<std::string, std::vector<std::string>>& directory_manifest,
                          const std::map<std::string, ImageSize>& image_dims,
                          std::string_view source_name);

/// Interchange Format: COCO layout plus provenance, split and pseudo flags.
std::string emit(const Dataset& dataset);
Dataset load(std::string_view text);

}  // namespace wastekit
