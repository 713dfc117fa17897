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

#include "wastekit/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json_util.hpp"

namespace wastekit {
namespace {

using detail::json;

void warn(Warnings* warnings, std::string message) {
  if (warnings != nullptr) warnings->push_back(std::move(message));
}

std::string format_box(const BBox& b) {
  std::ostringstream os;
  os << "[" << b.x << ", " << b.y << ", " << b.w << ", " << b.h << "]";
  return os.str();
}

// Clamps in place; returns true when the box changed.
bool clamp_annotation(AnnotationRecord& a, const ImageRecord& image, Warnings* warnings) {
  const BBox clamped = clamp_to_image(a.bbox, static_cast<double>(image.width),
                                      static_cast<double>(image.height));
  if (clamped == a.bbox) return false;
  warn(warnings, "annotation " + std::to_string(a.id) + " (" + a.source_dataset + ", image '" +
                     image.file_name + "' " + std::to_string(image.width) + "x" +
                     std::to_string(image.height) + "): bbox " + format_box(a.bbox) +
                     " clamped to " + format_box(clamped));
  a.bbox = clamped;
  return true;
}

// Extent of all polygons in a COCO `segmentation` list.
std::optional<BBox> polygon_extent(const json& segmentation) {
  if (!segmentation.is_array() || segmentation.empty()) return std::nullopt;
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = x0;
  double x1 = -x0;
  double y1 = -x0;
  for (const auto& poly : segmentation) {
    if (!poly.is_array() || poly.size() < 2 || poly.size() % 2 != 0) return std::nullopt;
    for (std::size_t i = 0; i < poly.size(); i += 2) {
      if (!poly[i].is_number() || !poly[i + 1].is_number()) return std::nullopt;
      const double px = poly[i].get<double>();
      const double py = poly[i + 1].get<double>();
      x0 = std::min(x0, px);
      x1 = std::max(x1, px);
      y0 = std::min(y0, py);
      y1 = std::max(y1, py);
    }
  }
  return BBox{x0, y0, x1 - x0, y1 - y0};
}

std::vector<CategoryDef> parse_categories(const json& arr, std::string_view source,
                                          bool interchange) {
  std::vector<CategoryDef> out;
  std::unordered_set<Id> seen;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto path = detail::index_path("categories", i);
    CategoryDef c;
    c.id = detail::require_int(arr[i], "id", path);
    c.name = detail::require_string(arr[i], "name", path);
    c.source_dataset = interchange ? detail::require_string(arr[i], "source_dataset", path)
                                   : std::string(source);
    if (!interchange) {
      if (c.name.empty()) throw SchemaError(path + ".name", "category " + std::to_string(c.id) + " has an empty name");
      if (!seen.insert(c.id).second) {
        throw SchemaError(path + ".id", "duplicate category id " + std::to_string(c.id));
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ImageRecord> parse_images(const json& arr, std::string_view source, bool interchange) {
  std::vector<ImageRecord> out;
  std::unordered_set<Id> seen;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto path = detail::index_path("images", i);
    ImageRecord im;
    im.id = detail::require_int(arr[i], "id", path);
    im.file_name = detail::require_string(arr[i], "file_name", path);
    im.width = detail::require_int(arr[i], "width", path);
    im.height = detail::require_int(arr[i], "height", path);
    if (interchange) {
      im.source_dataset = detail::require_string(arr[i], "source_dataset", path);
      const auto split = detail::require_string(arr[i], "split", path);
      auto parsed = parse_split(split);
      if (!parsed) throw SchemaError(path + ".split", "unknown split '" + split + "'");
      im.split = *parsed;
    } else {
      im.source_dataset = std::string(source);
      if (im.width <= 0 || im.height <= 0) {
        throw SchemaError(path + ".width", "image " + std::to_string(im.id) +
                                               " has non-positive dimensions");
      }
      if (!seen.insert(im.id).second) {
        throw SchemaError(path + ".id", "duplicate image id " + std::to_string(im.id));
      }
    }
    out.push_back(std::move(im));
  }
  return out;
}

}  // namespace

Dataset ingest_coco(std::string_view json_document, std::string_view source_name,
                    Warnings* warnings) {
  const json doc = detail::parse_json(json_document);
  if (!doc.is_object()) throw SchemaError("", "COCO document must be a JSON object");
  const auto& images = detail::require_array(doc, "images", "");
  const auto& annotations = detail::require_array(doc, "annotations", "");
  const auto& categories = detail::require_array(doc, "categories", "");

  Dataset ds;
  ds.provenance.emplace_back(source_name);
  ds.categories = parse_categories(categories, source_name, false);
  ds.images = parse_images(images, source_name, false);

  // Scene tags (TACO background descriptions) are kept only as opaque text.
  if (auto it = doc.find("scene_categories"); it != doc.end() && it->is_array()) {
    for (const auto& sc : *it) {
      if (sc.is_object() && sc.contains("name") && sc["name"].is_string()) {
        ds.provenance.push_back(std::string(source_name) + ":scene:" + sc["name"].get<std::string>());
      }
    }
  }

  std::unordered_map<Id, std::size_t> image_index;
  for (std::size_t i = 0; i < ds.images.size(); ++i) image_index.emplace(ds.images[i].id, i);
  std::unordered_set<Id> category_ids;
  for (const auto& c : ds.categories) category_ids.insert(c.id);

  std::unordered_set<Id> seen;
  ds.annotations.reserve(annotations.size());
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto path = detail::index_path("annotations", i);
    const auto& rec = annotations[i];
    AnnotationRecord a;
    a.id = detail::require_int(rec, "id", path);
    a.image_id = detail::require_int(rec, "image_id", path);
    a.category_id = detail::require_int(rec, "category_id", path);
    a.source_dataset = std::string(source_name);
    if (!seen.insert(a.id).second) {
      throw SchemaError(path + ".id", "duplicate annotation id " + std::to_string(a.id));
    }

    if (auto it = rec.find("bbox"); it != rec.end()) {
      a.bbox = detail::parse_bbox(*it, path + ".bbox");
    } else if (auto seg = rec.find("segmentation"); seg != rec.end() && polygon_extent(*seg)) {
      a.bbox = *polygon_extent(*seg);
    } else {
      throw SchemaError(path + ".bbox", "missing required field '" + path + ".bbox'");
    }
    if (a.bbox.w < 0 || a.bbox.h < 0) {
      throw SchemaError(path + ".bbox", "annotation " + std::to_string(a.id) + " has negative size");
    }

    auto img = image_index.find(a.image_id);
    if (img == image_index.end()) {
      throw SchemaError(path + ".image_id", "annotation " + std::to_string(a.id) +
                                                " references missing image id " +
                                                std::to_string(a.image_id));
    }
    if (!category_ids.contains(a.category_id)) {
      throw SchemaError(path + ".category_id", "annotation " + std::to_string(a.id) +
                                                   " references missing category id " +
                                                   std::to_string(a.category_id));
    }

    clamp_annotation(a, ds.images[img->second], warnings);
    if (auto area = rec.find("area"); area != rec.end() && !area->is_null()) {
      a.area = detail::as_number(*area, path + ".area");
    } else {
      a.area = a.bbox.area();
    }
    ds.annotations.push_back(std::move(a));
  }
  return ds;
}

Dataset ingest_yolo(const std::map<std::string, std::string>& label_files,
                    const std::map<std::string, ImageSize>& image_dims,
                    const std::vector<std::string>& class_names, std::string_view source_name,
                    Warnings* warnings) {
  Dataset ds;
  ds.provenance.emplace_back(source_name);
  for (std::size_t k = 0; k < class_names.size(); ++k) {
    ds.categories.push_back({static_cast<Id>(k + 1), class_names[k], std::string(source_name)});
  }

  std::set<std::string> names;
  for (const auto& [name, _] : label_files) {
    if (!image_dims.contains(name)) {
      throw DataError("no image dimensions known for '" + name + "'");
    }
    names.insert(name);
  }
  for (const auto& [name, _] : image_dims) names.insert(name);

  Id next_annotation = 1;
  for (const auto& name : names) {
    const ImageSize dims = image_dims.at(name);
    ImageRecord im{static_cast<Id>(ds.images.size() + 1), name, dims.width, dims.height,
                   std::string(source_name), Split::kUnassigned};
    if (im.width <= 0 || im.height <= 0) {
      throw DataError("image '" + name + "' has non-positive dimensions");
    }
    ds.images.push_back(im);

    auto label = label_files.find(name);
    if (label == label_files.end()) continue;
    std::istringstream lines(label->second);
    std::string line;
    for (std::size_t line_no = 1; std::getline(lines, line); ++line_no) {
      std::istringstream tokens(line);
      std::vector<std::string> fields;
      for (std::string t; tokens >> t;) fields.push_back(t);
      if (fields.empty()) continue;

      const std::string where = name + ":" + std::to_string(line_no);
      if (fields.size() != 5) {
        throw SchemaError(where, "line " + std::to_string(line_no) + " of '" + name +
                                     "': expected 'class cx cy w h'");
      }
      std::size_t cls = 0;
      {
        const auto& t = fields[0];
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), cls);
        if (ec != std::errc() || p != t.data() + t.size()) {
          throw SchemaError(where, "line " + std::to_string(line_no) + " of '" + name +
                                       "': bad class index '" + t + "'");
        }
      }
      if (cls >= class_names.size()) {
        throw SchemaError(where, "line " + std::to_string(line_no) + " of '" + name +
                                     "': class index " + std::to_string(cls) +
                                     " out of range (" + std::to_string(class_names.size()) +
                                     " classes)");
      }
      double v[4];
      for (int k = 0; k < 4; ++k) {
        const auto& t = fields[k + 1];
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v[k]);
        if (ec != std::errc() || p != t.data() + t.size()) {
          throw SchemaError(where, "line " + std::to_string(line_no) + " of '" + name +
                                       "': bad number '" + t + "'");
        }
        if (!(v[k] >= 0.0 && v[k] <= 1.0)) {
          throw SchemaError(where, "line " + std::to_string(line_no) + " of '" + name +
                                       "': fraction " + t + " outside [0, 1]");
        }
      }
      const double W = static_cast<double>(im.width);
      const double H = static_cast<double>(im.height);
      AnnotationRecord a;
      a.id = next_annotation++;
      a.image_id = im.id;
      a.category_id = static_cast<Id>(cls + 1);
      a.bbox = {(v[0] - v[2] / 2) * W, (v[1] - v[3] / 2) * H, v[2] * W, v[3] * H};
      a.source_dataset = std::string(source_name);
      clamp_annotation(a, im, warnings);
      a.area = a.bbox.area();
      ds.annotations.push_back(std::move(a));
    }
  }
  return ds;
}

Dataset ingest_label_dirs(const std::map<std::string, std::vector<std::string>>& directory_manifest,
                          const std::map<std::string, ImageSize>& image_dims,
                          std::string_view source_name) {
  Dataset ds;
  if (directory_manifest.empty()) return ds;
  ds.provenance.emplace_back(source_name);

  std::set<std::string> files;
  for (const auto& [cls, list] : directory_manifest) {
    ds.categories.push_back({static_cast<Id>(ds.categories.size() + 1), cls, std::string(source_name)});
    for (const auto& f : list) {
      if (!image_dims.contains(f)) throw DataError("no image dimensions known for '" + f + "'");
      files.insert(f);
    }
  }
  std::map<std::string, const ImageRecord*> by_name;
  ds.images.reserve(files.size());
  for (const auto& f : files) {
    const auto dims = image_dims.at(f);
    if (dims.width <= 0 || dims.height <= 0) {
      throw DataError("image '" + f + "' has non-positive dimensions");
    }
    ds.images.push_back({static_cast<Id>(ds.images.size() + 1), f, dims.width, dims.height,
                         std::string(source_name), Split::kUnassigned});
  }
  for (const auto& im : ds.images) by_name.emplace(im.file_name, &im);

  Id category = 1;
  for (const auto& [cls, list] : directory_manifest) {
    std::set<std::string> unique(list.begin(), list.end());
    for (const auto& f : unique) {
      const auto* im = by_name.at(f);
      AnnotationRecord a;
      a.id = static_cast<Id>(ds.annotations.size() + 1);
      a.image_id = im->id;
      a.category_id = category;
      a.bbox = {0, 0, static_cast<double>(im->width), static_cast<double>(im->height)};
      a.area = a.bbox.area();
      a.source_dataset = std::string(source_name);
      ds.annotations.push_back(std::move(a));
    }
    ++category;
  }
  return ds;
}

std::string emit(const Dataset& dataset) {
  json images = json::array();
  for (const auto& im : dataset.images) {
    images.push_back({{"id", im.id},
                      {"file_name", im.file_name},
                      {"width", im.width},
                      {"height", im.height},
                      {"source_dataset", im.source_dataset},
                      {"split", std::string(to_string(im.split))}});
  }
  json annotations = json::array();
  for (const auto& a : dataset.annotations) {
    annotations.push_back({{"id", a.id},
                           {"image_id", a.image_id},
                           {"category_id", a.category_id},
                           {"bbox", detail::bbox_json(a.bbox)},
                           {"area", a.area},
                           {"source_dataset", a.source_dataset},
                           {"is_pseudo", a.is_pseudo}});
  }
  json categories = json::array();
  for (const auto& c : dataset.categories) {
    categories.push_back({{"id", c.id}, {"name", c.name}, {"source_dataset", c.source_dataset}});
  }
  json doc = {{"images", std::move(images)},
              {"annotations", std::move(annotations)},
              {"categories", std::move(categories)},
              {"provenance", dataset.provenance}};
  return detail::dump_json(doc);
}

Dataset load(std::string_view text) {
  const json doc = detail::parse_json(text);
  if (!doc.is_object()) throw SchemaError("", "interchange document must be a JSON object");
  Dataset ds;
  ds.images = parse_images(detail::require_array(doc, "images", ""), "", true);
  ds.categories = parse_categories(detail::require_array(doc, "categories", ""), "", true);
  const auto& annotations = detail::require_array(doc, "annotations", "");
  ds.annotations.reserve(annotations.size());
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto path = detail::index_path("annotations", i);
    const auto& rec = annotations[i];
    AnnotationRecord a;
    a.id = detail::require_int(rec, "id", path);
    a.image_id = detail::require_int(rec, "image_id", path);
    a.category_id = detail::require_int(rec, "category_id", path);
    a.bbox = detail::parse_bbox(detail::require(rec, "bbox", path), path + ".bbox");
    a.area = detail::require_number(rec, "area", path);
    a.source_dataset = detail::require_string(rec, "source_dataset", path);
    a.is_pseudo = detail::as_bool(detail::require(rec, "is_pseudo", path), path + ".is_pseudo");
    ds.annotations.push_back(std::move(a));
  }
  for (const auto& p : detail::require_array(doc, "provenance", "")) {
    ds.provenance.push_back(detail::as_string(p, "provenance"));
  }
  return ds;
}

}  // namespace wastekit
