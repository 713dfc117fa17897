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

#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "support/generators.hpp"
#include "wastekit/model.hpp"

namespace wastekit {
namespace {

Dataset small_fixture() {
  Dataset ds;
  ds.categories = {{1, "bottle", "taco"}, {2, "can", "taco"}};
  ds.images = {{1, "a.jpg", 640, 480, "taco", Split::kUnassigned},
               {2, "b.jpg", 320, 240, "taco", Split::kTrain}};
  ds.annotations = {{1, 1, 1, {10, 10, 50, 50}, 2500, "taco", false},
                    {2, 1, 2, {100, 100, 20, 30}, 600, "taco", false},
                    {3, 2, 1, {0, 0, 320, 240}, 76800, "taco", true}};
  return ds;
}

TEST(Validate, WellFormedFixtureHasNoViolations) {
  EXPECT_TRUE(validate(small_fixture()).empty());
}

TEST(Validate, EmptyDatasetHasNoViolations) { EXPECT_TRUE(validate(Dataset{}).empty()); }

TEST(Validate, DanglingImageId) {
  auto ds = small_fixture();
  ds.annotations[1].image_id = 99;
  const auto v = validate(ds);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], (Violation{"annotation", 2, "dangling image_id"}));
}

TEST(Validate, ReportsEachRule) {
  Dataset ds = small_fixture();
  ds.categories.push_back({1, "", "x"});
  ds.images.push_back({2, "c.jpg", 0, 10, "x", Split::kTest});
  ds.annotations.push_back({3, 1, 7, {600, 400, 100, 100}, 0, "x", false});
  ds.annotations.push_back({4, 1, 1, {-1, 0, -5, 10}, 10, "x", false});
  const auto v = validate(ds);
  auto has = [&](const std::string& record, Id id, const std::string& rule) {
    return std::find(v.begin(), v.end(), Violation{record, id, rule}) != v.end();
  };
  EXPECT_TRUE(has("category", 1, "duplicate id"));
  EXPECT_TRUE(has("category", 1, "empty name"));
  EXPECT_TRUE(has("image", 2, "duplicate id"));
  EXPECT_TRUE(has("image", 2, "non-positive dimensions"));
  EXPECT_TRUE(has("annotation", 3, "duplicate id"));
  EXPECT_TRUE(has("annotation", 3, "dangling category_id"));
  EXPECT_TRUE(has("annotation", 3, "zero-area"));
  EXPECT_TRUE(has("annotation", 3, "bbox out of bounds"));
  EXPECT_TRUE(has("annotation", 4, "negative bbox size"));
}

TEST(Validate, NonFiniteBox) {
  auto ds = small_fixture();
  ds.annotations[0].bbox.w = std::numeric_limits<double>::quiet_NaN();
  const auto v = validate(ds);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "non-finite bbox");
}

TEST(Validate, IdempotentOnRandomDatasets) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    auto ds = testing::random_dataset(rng);
    EXPECT_TRUE(validate(ds).empty());
    // Break something at random and check two calls agree.
    if (!ds.annotations.empty()) ds.annotations.front().image_id = -5;
    EXPECT_EQ(validate(ds), validate(ds));
  }
}

TEST(ClampToImage, ClipsToFrame) {
  EXPECT_EQ(clamp_to_image({600, 400, 100, 100}, 640, 480), (BBox{600, 400, 40, 80}));
  EXPECT_EQ(clamp_to_image({-10, -5, 30, 20}, 640, 480), (BBox{0, 0, 20, 15}));
  EXPECT_EQ(clamp_to_image({700, 10, 5, 5}, 640, 480), (BBox{640, 10, 0, 5}));
  EXPECT_EQ(clamp_to_image({1, 2, 3, 4}, 640, 480), (BBox{1, 2, 3, 4}));
  // In-frame boxes come back bit for bit, even when x + w - x != w.
  const BBox odd{0.45 * 524 - 0.15 * 524, 0.1 * 524, 0.3 * 524, 0.8 * 524};
  EXPECT_EQ(clamp_to_image(odd, 524, 524), odd);
}

TEST(TargetClassNames, RoundTripAndIds) {
  for (auto c : kAllTargetClasses) {
    EXPECT_EQ(parse_target_class(to_string(c)), c);
    EXPECT_EQ(target_class_from_id(category_id(c)), c);
  }
  EXPECT_EQ(category_id(TargetClass::kBio), 1);
  EXPECT_EQ(category_id(TargetClass::kUnknown), 7);
  EXPECT_EQ(category_id(TargetClass::kBackground), 8);
  EXPECT_FALSE(target_class_from_id(kLitterCategoryId).has_value());
  EXPECT_FALSE(parse_target_class("litter").has_value());
  EXPECT_FALSE(target_class_from_id(0).has_value());
}

TEST(SplitNames, RoundTrip) {
  for (auto s : {Split::kUnassigned, Split::kTrain, Split::kTest}) {
    EXPECT_EQ(parse_split(to_string(s)), s);
  }
  EXPECT_FALSE(parse_split("val").has_value());
}

}  // namespace
}  // namespace wastekit
