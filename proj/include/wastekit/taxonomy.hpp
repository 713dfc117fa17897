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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "wastekit/model.hpp"

namespace wastekit {

/// Wildcard category name: matches every category of the entry's source.
inline constexpr std::string_view kAnyCategory = "*";

/// Source category -> sorting category. Lookup order: exact
/// (source, category) entry, then (source, "*"), then `fallback`.
struct TaxonomyMap {
  std::map<std::pair<std::string, std::string>, TargetClass> entries;
  std::optional<TargetClass> fallback;

  std::optional<TargetClass> resolve(std::string_view source, std::string_view category) const;

  bool operator==(const TaxonomyMap&) const = default;
};

/// Reads {"default": "<class>" | null, "entries": [{"source", "category",
/// "target"}]}. Conflicting duplicate entries are a SchemaError.
TaxonomyMap load_taxonomy(std::string_view text);
std::string emit_taxonomy(const TaxonomyMap& map);

/// Retargets a dataset onto the sorting classes. Output categories use the
/// canonical ids (see category_id(TargetClass)) and appear in enum order.
/// Annotations whose category resolves to background are removed; their
/// images stay as negatives.
///
/// Throws DataError listing every unresolved category name.
Dataset map_categories(const Dataset& dataset, const TaxonomyMap& map);

/// Rewrites every annotation to one "litter" category (id kLitterCategoryId).
Dataset collapse_to_single_class(const Dataset& dataset);

}  // namespace wastekit
