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

#include "wastekit/taxonomy.hpp"

#include <set>
#include <unordered_map>

#include "json_util.hpp"

namespace wastekit {
namespace {

using detail::json;

// Joins the distinct values in first-seen order with '+'.
std::string join_sources(const std::vector<std::string>& sources) {
  std::string out;
  std::set<std::string> seen;
  for (const auto& s : sources) {
    if (!seen.insert(s).second) continue;
    if (!out.empty()) out += "+";
    out += s;
  }
  return out;
}

}  // namespace

std::optional<TargetClass> TaxonomyMap::resolve(std::string_view source,
                                                std::string_view category) const {
  if (auto it = entries.find({std::string(source), std::string(category)}); it != entries.end()) {
    return it->second;
  }
  if (auto it = entries.find({std::string(source), std::string(kAnyCategory)});
      it != entries.end()) {
    return it->second;
  }
  return fallback;
}

TaxonomyMap load_taxonomy(std::string_view text) {
  const json doc = detail::parse_json(text);
  if (!doc.is_object()) throw SchemaError("", "taxonomy must be a JSON object");
  TaxonomyMap map;
  const auto& def = detail::require(doc, "default", "");
  if (!def.is_null()) map.fallback = detail::parse_label(def, "default");

  const auto& entries = detail::require_array(doc, "entries", "");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto path = detail::index_path("entries", i);
    auto source = detail::require_string(entries[i], "source", path);
    auto category = detail::require_string(entries[i], "category", path);
    const auto target = detail::parse_label(detail::require(entries[i], "target", path),
                                            path + ".target");
    auto [it, inserted] = map.entries.emplace(std::pair{source, category}, target);
    if (!inserted && it->second != target) {
      throw SchemaError(path, "category '" + category + "' of '" + source +
                                  "' is mapped to two different targets");
    }
  }
  return map;
}

std::string emit_taxonomy(const TaxonomyMap& map) {
  json entries = json::array();
  for (const auto& [key, target] : map.entries) {
    entries.push_back(
        {{"source", key.first}, {"category", key.second}, {"target", std::string(to_string(target))}});
  }
  json doc = {{"default", map.fallback ? json(std::string(to_string(*map.fallback))) : json(nullptr)},
              {"entries", std::move(entries)}};
  return detail::dump_json(doc);
}

Dataset map_categories(const Dataset& dataset, const TaxonomyMap& map) {
  std::unordered_map<Id, TargetClass> resolved;
  std::set<std::string> unmapped;
  std::map<TargetClass, std::vector<std::string>> sources_of;
  for (const auto& c : dataset.categories) {
    auto target = map.resolve(c.source_dataset, c.name);
    if (!target) {
      unmapped.insert(c.name);
      continue;
    }
    resolved.emplace(c.id, *target);
    sources_of[*target].push_back(c.source_dataset);
  }
  if (!unmapped.empty()) {
    std::string names;
    for (const auto& n : unmapped) {
      if (!names.empty()) names += ", ";
      names += "\"" + n + "\"";
    }
    throw DataError("taxonomy does not cover categories: " + names);
  }

  Dataset out;
  out.images = dataset.images;
  out.provenance = dataset.provenance;
  for (const auto& [target, sources] : sources_of) {
    if (target == TargetClass::kBackground) continue;
    out.categories.push_back(
        {category_id(target), std::string(to_string(target)), join_sources(sources)});
  }
  out.annotations.reserve(dataset.annotations.size());
  for (const auto& a : dataset.annotations) {
    auto it = resolved.find(a.category_id);
    if (it == resolved.end()) {
      throw DataError("annotation " + std::to_string(a.id) + " references missing category id " +
                      std::to_string(a.category_id));
    }
    if (it->second == TargetClass::kBackground) continue;
    AnnotationRecord copy = a;
    copy.category_id = category_id(it->second);
    out.annotations.push_back(std::move(copy));
  }
  return out;
}

Dataset collapse_to_single_class(const Dataset& dataset) {
  Dataset out;
  out.images = dataset.images;
  out.provenance = dataset.provenance;
  if (!dataset.categories.empty()) {
    std::vector<std::string> sources;
    for (const auto& c : dataset.categories) sources.push_back(c.source_dataset);
    out.categories.push_back({kLitterCategoryId, std::string(kLitterName), join_sources(sources)});
  }
  out.annotations = dataset.annotations;
  for (auto& a : out.annotations) a.category_id = kLitterCategoryId;
  return out;
}

}  // namespace wastekit
