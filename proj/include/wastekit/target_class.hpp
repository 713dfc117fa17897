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

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace wastekit {

/// The seven sorting categories plus the classifier-only background class.
enum class TargetClass : std::uint8_t {
  kBio,
  kGlass,
  kMetalsAndPlastic,
  kNonRecyclable,
  kOther,
  kPaper,
  kUnknown,
  kBackground,
};

inline constexpr std::array<TargetClass, 8> kAllTargetClasses = {
    TargetClass::kBio,           TargetClass::kGlass,
    TargetClass::kMetalsAndPlastic, TargetClass::kNonRecyclable,
    TargetClass::kOther,         TargetClass::kPaper,
    TargetClass::kUnknown,       TargetClass::kBackground,
};

/// Canonical category ids: bio = 1 ... unknown = 7, background = 8.
/// The class-agnostic stage-1 category "litter" uses kLitterCategoryId so
/// that composed outputs never alias a sorting category.
inline constexpr std::int64_t kLitterCategoryId = 9;
inline constexpr std::string_view kLitterName = "litter";

std::string_view to_string(TargetClass c);
std::optional<TargetClass> parse_target_class(std::string_view name);

inline constexpr std::int64_t category_id(TargetClass c) {
  return static_cast<std::int64_t>(c) + 1;
}
std::optional<TargetClass> target_class_from_id(std::int64_t id);

}  // namespace wastekit
