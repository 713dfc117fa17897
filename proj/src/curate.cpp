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

#include "wastekit/curate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json_util.hpp"
#include "wastekit/detect_eval.hpp"

namespace wastekit {
namespace {

using detail::json;

constexpr std::string_view kNoStratum = "<none>";

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t rank_key(std::uint64_t seed, Id id) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(id));
}

void append_source(std::string& joined, const std::string& source) {
  if (source.empty()) return;
  std::size_t start = 0;
  while (start <= joined.size()) {
    const auto end = std::min(joined.find('+', start), joined.size());
    if (joined.compare(start, end - start, source) == 0 && end - start == source.size()) return;
    start = end + 1;
  }
  if (!joined.empty()) joined += "+";
  joined += source;
}

// Most frequent category per image, ties to the lowest category id.
std::unordered_map<Id, Id> dominant_categories(const Dataset& dataset) {
  std::unordered_map<Id, std::map<Id, std::int64_t>> counts;
  for (const auto& a : dataset.annotations) ++counts[a.image_id][a.category_id];
  std::unordered_map<Id, Id> out;
  for (const auto& [image, per_cat] : counts) {
    Id best = 0;
    std::int64_t best_n = -1;
    for (const auto& [cat, n] : per_cat) {
      if (n > best_n) {
        best = cat;
        best_n = n;
      }
    }
    out.emplace(image, best);
  }
  return out;
}

std::string category_label(const Dataset& dataset, Id category) {
  for (const auto& c : dataset.categories) {
    if (c.id == category) return c.name;
  }
  return "#" + std::to_string(category);
}

std::string stratum_with(const Dataset& dataset, const ImageRecord& image, StratifyBy by,
                         const std::unordered_map<Id, Id>& dominant,
                         const std::unordered_map<Id, std::string>& names) {
  switch (by) {
    case StratifyBy::kNone:
      return "";
    case StratifyBy::kSourceDataset:
      return image.source_dataset;
    case StratifyBy::kCategory:
      break;
  }
  auto it = dominant.find(image.id);
  if (it == dominant.end()) return std::string(kNoStratum);
  if (auto n = names.find(it->second); n != names.end()) return n->second;
  return category_label(dataset, it->second);
}

}  // namespace

Dataset merge(std::span<const Dataset> datasets) {
  Dataset out;
  std::unordered_set<std::string> file_names;
  std::map<std::string, std::size_t> category_by_name;  // name -> index in out.categories
  std::unordered_set<Id> used_category_ids;
  Id max_category_id = 0;
  for (const auto& d : datasets) {
    for (const auto& c : d.categories) max_category_id = std::max(max_category_id, c.id);
  }

  for (const auto& d : datasets) {
    for (const auto& p : d.provenance) {
      if (std::find(out.provenance.begin(), out.provenance.end(), p) == out.provenance.end()) {
        out.provenance.push_back(p);
      }
    }

    std::unordered_map<Id, Id> category_map;
    for (const auto& c : d.categories) {
      auto it = category_by_name.find(c.name);
      if (it != category_by_name.end()) {
        auto& unified = out.categories[it->second];
        append_source(unified.source_dataset, c.source_dataset);
        category_map[c.id] = unified.id;
        continue;
      }
      Id id = c.id;
      if (id < 1 || used_category_ids.contains(id)) id = ++max_category_id;
      used_category_ids.insert(id);
      category_by_name.emplace(c.name, out.categories.size());
      out.categories.push_back({id, c.name, c.source_dataset});
      category_map[c.id] = id;
    }

    std::unordered_map<Id, Id> image_map;
    for (const auto& im : d.images) {
      ImageRecord copy = im;
      copy.id = static_cast<Id>(out.images.size() + 1);
      if (file_names.contains(copy.file_name)) {
        std::string candidate = im.source_dataset + "/" + im.file_name;
        for (int k = 2; file_names.contains(candidate); ++k) {
          candidate = im.source_dataset + "/" + im.file_name + "#" + std::to_string(k);
        }
        copy.file_name = candidate;
      }
      file_names.insert(copy.file_name);
      image_map[im.id] = copy.id;
      out.images.push_back(std::move(copy));
    }

    for (const auto& a : d.annotations) {
      auto im = image_map.find(a.image_id);
      auto cat = category_map.find(a.category_id);
      if (im == image_map.end() || cat == category_map.end()) {
        throw DataError("merge input annotation " + std::to_string(a.id) +
                        " has a dangling reference");
      }
      AnnotationRecord copy = a;
      copy.id = static_cast<Id>(out.annotations.size() + 1);
      copy.image_id = im->second;
      copy.category_id = cat->second;
      out.annotations.push_back(std::move(copy));
    }
  }
  return out;
}

std::optional<StratifyBy> parse_stratify(std::string_view name) {
  if (name == "category") return StratifyBy::kCategory;
  if (name == "source" || name == "source_dataset") return StratifyBy::kSourceDataset;
  if (name == "none") return StratifyBy::kNone;
  return std::nullopt;
}

std::string stratum_of(const Dataset& dataset, const ImageRecord& image, StratifyBy by) {
  return stratum_with(dataset, image, by, dominant_categories(dataset), {});
}

std::size_t train_quota(double train_fraction, std::size_t stratum_size) {
  if (stratum_size == 0) return 0;
  // The slack keeps exact halves (0.7 * 5) from falling below the tie.
  const double raw = std::floor(train_fraction * static_cast<double>(stratum_size) + 0.5 + 1e-9);
  const auto quota = static_cast<std::size_t>(std::max(raw, 1.0));
  return std::min(quota, stratum_size);
}

Dataset split(const Dataset& dataset, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw DataError("train fraction must lie in (0, 1)");
  }
  const auto dominant = spec.stratify_by == StratifyBy::kCategory
                            ? dominant_categories(dataset)
                            : std::unordered_map<Id, Id>{};
  std::unordered_map<Id, std::string> names;
  for (const auto& c : dataset.categories) names.emplace(c.id, c.name);

  std::map<std::string, std::vector<std::pair<std::uint64_t, std::size_t>>> strata;
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    const auto& im = dataset.images[i];
    strata[stratum_with(dataset, im, spec.stratify_by, dominant, names)].emplace_back(
        rank_key(spec.seed, im.id), i);
  }

  Dataset out = dataset;
  for (auto& [key, members] : strata) {
    std::sort(members.begin(), members.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return dataset.images[a.second].id < dataset.images[b.second].id;
    });
    const std::size_t quota = train_quota(spec.train_fraction, members.size());
    for (std::size_t r = 0; r < members.size(); ++r) {
      out.images[members[r].second].split = r < quota ? Split::kTrain : Split::kTest;
    }
  }
  return out;
}

DatasetStats stats(const Dataset& dataset) {
  DatasetStats s;
  s.images = static_cast<std::int64_t>(dataset.images.size());
  s.annotations = static_cast<std::int64_t>(dataset.annotations.size());
  s.categories = static_cast<std::int64_t>(dataset.categories.size());

  std::unordered_map<Id, const ImageRecord*> images;
  for (const auto& im : dataset.images) {
    images.emplace(im.id, &im);
    ++s.per_source[im.source_dataset].images;
    ++s.per_split[std::string(to_string(im.split))].images;
  }
  std::unordered_map<Id, std::string> names;
  for (const auto& c : dataset.categories) names.emplace(c.id, c.name);

  std::set<std::pair<std::string, Id>> class_images;
  for (const auto& a : dataset.annotations) {
    ++s.per_source[a.source_dataset].annotations;
    auto n = names.find(a.category_id);
    const std::string cls = n != names.end() ? n->second : "#" + std::to_string(a.category_id);
    ++s.per_class[cls].annotations;
    if (class_images.emplace(cls, a.image_id).second) ++s.per_class[cls].images;
    if (auto im = images.find(a.image_id); im != images.end()) {
      ++s.per_split[std::string(to_string(im->second->split))].annotations;
    }
    if (a.is_pseudo) ++s.pseudo_annotations;
    switch (bucket(a.area)) {
      case SizeBucket::kSmall:
        ++s.small;
        break;
      case SizeBucket::kMedium:
        ++s.medium;
        break;
      case SizeBucket::kLarge:
        ++s.large;
        break;
    }
  }
  return s;
}

std::string emit_stats(const DatasetStats& s) {
  auto counts = [](const std::map<std::string, Counts>& m) {
    json j = json::object();
    for (const auto& [k, c] : m) j[k] = {{"images", c.images}, {"annotations", c.annotations}};
    return j;
  };
  json doc = {{"images", s.images},
              {"annotations", s.annotations},
              {"categories", s.categories},
              {"pseudo_annotations", s.pseudo_annotations},
              {"per_source", counts(s.per_source)},
              {"per_class", counts(s.per_class)},
              {"per_split", counts(s.per_split)},
              {"size_buckets", {{"small", s.small}, {"medium", s.medium}, {"large", s.large}}}};
  return detail::dump_json(doc);
}

std::string format_stats_table(const DatasetStats& s) {
  std::ostringstream os;
  char line[256];
  auto section = [&](const char* title, const std::map<std::string, Counts>& m) {
    std::snprintf(line, sizeof line, "%-28s %10s %13s\n", title, "# images", "# instances");
    os << line;
    for (const auto& [k, c] : m) {
      std::snprintf(line, sizeof line, "%-28s %10lld %13lld\n", k.c_str(),
                    static_cast<long long>(c.images), static_cast<long long>(c.annotations));
      os << line;
    }
    os << "\n";
  };
  std::snprintf(line, sizeof line, "%-28s %10lld %13lld\n", "total",
                static_cast<long long>(s.images), static_cast<long long>(s.annotations));
  os << line;
  std::snprintf(line, sizeof line, "%-28s %10lld\n", "# classes", static_cast<long long>(s.categories));
  os << line;
  std::snprintf(line, sizeof line, "%-28s %10lld\n\n", "# pseudo-labels",
                static_cast<long long>(s.pseudo_annotations));
  os << line;
  section("source", s.per_source);
  section("class", s.per_class);
  section("split", s.per_split);
  std::snprintf(line, sizeof line, "%-28s %10s %10s %10s\n%-28s %10lld %10lld %10lld\n", "size",
                "small", "medium", "large", "instances", static_cast<long long>(s.small),
                static_cast<long long>(s.medium), static_cast<long long>(s.large));
  os << line;
  return os.str();
}

BBox expand_region(const BBox& box, double margin_fraction, double width, double height) {
  const double m = margin_fraction * std::max(box.w, box.h);
  return clamp_to_image({box.x - m, box.y - m, box.w + 2 * m, box.h + 2 * m}, width, height);
}

std::vector<CropRecord> crop_manifest(const Dataset& dataset, double margin_fraction,
                                      Warnings* warnings) {
  if (!(margin_fraction >= 0)) throw DataError("crop margin must be >= 0");
  std::unordered_map<Id, const ImageRecord*> images;
  for (const auto& im : dataset.images) images.emplace(im.id, &im);

  std::vector<CropRecord> out;
  for (std::size_t i = 0; i < dataset.annotations.size(); ++i) {
    const auto& a = dataset.annotations[i];
    auto it = images.find(a.image_id);
    if (it == images.end()) {
      throw DataError("annotation " + std::to_string(a.id) + " references missing image id " +
                      std::to_string(a.image_id));
    }
    const BBox region = expand_region(a.bbox, margin_fraction, static_cast<double>(it->second->width),
                                      static_cast<double>(it->second->height));
    const Id crop_id = static_cast<Id>(i + 1);
    if (!(region.area() > 0)) {
      if (warnings != nullptr) {
        warnings->push_back("crop " + std::to_string(crop_id) + " (annotation " +
                            std::to_string(a.id) + ") has zero area and was dropped");
      }
      continue;
    }
    out.push_back({crop_id, a.image_id, region, a.id, margin_fraction});
  }
  return out;
}

std::vector<CropRecord> crop_manifest(std::span<const DetectionRecord> detections,
                                      const Dataset& images, double margin_fraction,
                                      Warnings* warnings) {
  if (!(margin_fraction >= 0)) throw DataError("crop margin must be >= 0");
  std::unordered_map<Id, const ImageRecord*> by_id;
  for (const auto& im : images.images) by_id.emplace(im.id, &im);

  std::vector<CropRecord> out;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const auto& d = detections[i];
    auto it = by_id.find(d.image_id);
    if (it == by_id.end()) {
      throw DataError("detection " + std::to_string(i) + " references unknown image id " +
                      std::to_string(d.image_id));
    }
    const BBox region = expand_region(d.bbox, margin_fraction, static_cast<double>(it->second->width),
                                      static_cast<double>(it->second->height));
    const Id crop_id = static_cast<Id>(i + 1);
    if (!(region.area() > 0)) {
      if (warnings != nullptr) {
        warnings->push_back("crop " + std::to_string(crop_id) + " (detection " + std::to_string(i) +
                            ") has zero area and was dropped");
      }
      continue;
    }
    out.push_back({crop_id, d.image_id, region, std::nullopt, margin_fraction});
  }
  return out;
}

std::string emit_crop_manifest(std::span<const CropRecord> crops) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& c : crops) {
    nlohmann::ordered_json rec;
    rec["crop_id"] = c.crop_id;
    rec["image_id"] = c.image_id;
    rec["region"] = {c.region.x, c.region.y, c.region.w, c.region.h};
    rec["source_annotation_id"] =
        c.source_annotation_id ? nlohmann::ordered_json(*c.source_annotation_id) : nullptr;
    rec["margin_fraction"] = c.margin_fraction;
    doc.push_back(std::move(rec));
  }
  return doc.dump(2) + "\n";
}

std::vector<CropRecord> load_crop_manifest(std::string_view text) {
  const json doc = detail::parse_json(text);
  if (!doc.is_array()) throw SchemaError("", "crop manifest must be a JSON array");
  std::vector<CropRecord> out;
  std::unordered_set<Id> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto path = detail::index_path("", i);
    CropRecord c;
    c.crop_id = detail::require_int(doc[i], "crop_id", path);
    c.image_id = detail::require_int(doc[i], "image_id", path);
    c.region = detail::parse_bbox(detail::require(doc[i], "region", path), path + ".region");
    const auto& src = detail::require(doc[i], "source_annotation_id", path);
    if (!src.is_null()) c.source_annotation_id = detail::as_int(src, path + ".source_annotation_id");
    c.margin_fraction = detail::require_number(doc[i], "margin_fraction", path);
    if (c.region.w < 0 || c.region.h < 0) {
      throw SchemaError(path + ".region", "negative region size at " + path);
    }
    if (!seen.insert(c.crop_id).second) {
      throw SchemaError(path + ".crop_id", "duplicate crop id " + std::to_string(c.crop_id));
    }
    out.push_back(c);
  }
  return out;
}

std::vector<ComposedDetection> compose_two_stage(std::span<const DetectionRecord> detections,
                                                 std::span<const CropRecord> crops,
                                                 std::span<const ClassPrediction> predictions) {
  std::unordered_map<Id, const CropRecord*> crop_by_id;
  for (const auto& c : crops) crop_by_id.emplace(c.crop_id, &c);

  std::vector<const ClassPrediction*> by_detection(detections.size(), nullptr);
  for (const auto& p : predictions) {
    auto it = crop_by_id.find(p.crop_id);
    if (it == crop_by_id.end()) {
      throw DataError("prediction references unknown crop_id " + std::to_string(p.crop_id));
    }
    const auto index = it->second->crop_id - 1;
    if (index < 0 || static_cast<std::size_t>(index) >= detections.size() ||
        detections[static_cast<std::size_t>(index)].image_id != it->second->image_id) {
      throw DataError("crop " + std::to_string(p.crop_id) + " has no source detection");
    }
    auto& slot = by_detection[static_cast<std::size_t>(index)];
    if (slot != nullptr) {
      throw DataError("crop " + std::to_string(p.crop_id) + " has more than one prediction");
    }
    slot = &p;
  }

  std::vector<ComposedDetection> out;
  out.reserve(detections.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    ComposedDetection c{detections[i], std::nullopt, std::nullopt};
    if (const auto* p = by_detection[i]; p != nullptr) {
      if (p->label == TargetClass::kBackground) continue;
      c.label = p->label;
      c.class_score = p->score;
      c.detection.category_id = category_id(p->label);
    } else {
      c.detection.category_id = kLitterCategoryId;
    }
    out.push_back(c);
  }
  return out;
}

std::vector<DetectionRecord> detections_of(std::span<const ComposedDetection> composed) {
  std::vector<DetectionRecord> out;
  out.reserve(composed.size());
  for (const auto& c : composed) out.push_back(c.detection);
  return out;
}

}  // namespace wastekit
