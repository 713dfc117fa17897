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

// Internal helpers shared by every reader and writer of the JSON file
// formats. Not installed.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"
#include "wastekit/error.hpp"
#include "wastekit/model.hpp"

namespace wastekit::detail {

using json = nlohmann::json;

inline json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), e.byte);
  }
}

/// Canonical text form: sorted keys (std::map-backed objects), shortest
/// round-trip doubles, two-space indent, trailing newline.
inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

inline std::string join_path(std::string_view path, std::string_view key) {
  if (path.empty()) return std::string(key);
  return std::string(path) + "." + std::string(key);
}

inline const json& require(const json& obj, std::string_view key, std::string_view path) {
  const auto name = join_path(path, key);
  if (!obj.is_object()) {
    throw SchemaError(std::string(path.empty() ? key : path), "expected a JSON object at '" +
                                                                  std::string(path) + "'");
  }
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(name, "missing required field '" + name + "'");
  return *it;
}

inline const json& require_array(const json& obj, std::string_view key, std::string_view path) {
  const auto& v = require(obj, key, path);
  if (!v.is_array()) throw SchemaError(join_path(path, key), "expected an array");
  return v;
}

inline std::int64_t as_int(const json& v, const std::string& name) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
  }
  throw SchemaError(name, "field '" + name + "' must be an integer");
}

inline double as_number(const json& v, const std::string& name) {
  if (!v.is_number()) throw SchemaError(name, "field '" + name + "' must be a number");
  return v.get<double>();
}

inline std::string as_string(const json& v, const std::string& name) {
  if (!v.is_string()) throw SchemaError(name, "field '" + name + "' must be a string");
  return v.get<std::string>();
}

inline bool as_bool(const json& v, const std::string& name) {
  if (!v.is_boolean()) throw SchemaError(name, "field '" + name + "' must be a boolean");
  return v.get<bool>();
}

inline std::int64_t require_int(const json& obj, std::string_view key, std::string_view path) {
  return as_int(require(obj, key, path), join_path(path, key));
}
inline double require_number(const json& obj, std::string_view key, std::string_view path) {
  return as_number(require(obj, key, path), join_path(path, key));
}
inline std::string require_string(const json& obj, std::string_view key, std::string_view path) {
  return as_string(require(obj, key, path), join_path(path, key));
}

inline std::string index_path(std::string_view array, std::size_t i) {
  return std::string(array) + "[" + std::to_string(i) + "]";
}

inline BBox parse_bbox(const json& v, const std::string& name) {
  if (!v.is_array() || v.size() != 4) {
    throw SchemaError(name, "field '" + name + "' must be an array [x, y, w, h]");
  }
  return {as_number(v[0], name), as_number(v[1], name), as_number(v[2], name),
          as_number(v[3], name)};
}

inline json bbox_json(const BBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

inline TargetClass parse_label(const json& v, const std::string& name) {
  const auto text = as_string(v, name);
  auto c = parse_target_class(text);
  if (!c) throw SchemaError(name, "unknown target class '" + text + "'");
  return *c;
}

}  // namespace wastekit::detail
