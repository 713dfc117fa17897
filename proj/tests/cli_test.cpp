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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wastekit/classify_eval.hpp"
#include "wastekit/cli.hpp"
#include "wastekit/curate.hpp"
#include "wastekit/detect_eval.hpp"
#include "wastekit/ingest.hpp"
#include "wastekit/pseudolabel.hpp"
#include "wastekit/taxonomy.hpp"

namespace wastekit {
namespace {

namespace fs = std::filesystem;

const std::string kFixtures = WASTEKIT_FIXTURE_DIR;
const std::string kData = WASTEKIT_DATA_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("wastekit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Ingests the YOLO fixture into `name`.
  void ingest_fixture(const std::string& name) {
    const auto r = run({"ingest", "--format", "yolo", "-i", kFixtures + "/drinking_waste/labels",
                        "--dims", kFixtures + "/drinking_waste/dims.json", "--classes",
                        kFixtures + "/drinking_waste/classes.txt", "--source", "drinking-waste",
                        "-o", path(name)});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  }

  fs::path dir_;
};

TEST_F(CliTest, IngestYoloThenStatsReportsFourClasses) {
  ingest_fixture("dw.json");
  const auto ds = load(slurp(path("dw.json")));
  EXPECT_EQ(ds.images.size(), 6u);
  EXPECT_EQ(ds.annotations.size(), 7u);
  EXPECT_TRUE(validate(ds).empty());

  const auto r = run({"stats", "-i", path("dw.json")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("\"categories\": 4"), std::string::npos) << r.out;
  EXPECT_EQ(r.out, emit_stats(stats(ds)));

  const auto t = run({"stats", "-i", path("dw.json"), "--text"});
  EXPECT_NE(t.out.find("# classes"), std::string::npos);
}

TEST_F(CliTest, MapThroughDefaultTaxonomy) {
  ingest_fixture("dw.json");
  const auto r = run({"map", "-i", path("dw.json"), "--taxonomy", kData + "/taxonomy/default.json",
                      "-o", path("mapped.json")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto mapped = load(slurp(path("mapped.json")));
  EXPECT_EQ(mapped, map_categories(load(slurp(path("dw.json"))),
                                   load_taxonomy(slurp(kData + "/taxonomy/default.json"))));
  EXPECT_EQ(mapped.categories.size(), 2u);
}

TEST_F(CliTest, SplitIsByteIdentical) {
  ingest_fixture("dw.json");
  ASSERT_EQ(run({"split", "-i", path("dw.json"), "--ratio", "0.8", "--seed", "42", "-o", path("a.json")}).code, 0);
  ASSERT_EQ(run({"split", "-i", path("dw.json"), "--ratio", "0.8", "--seed", "42", "-o", path("b.json")}).code, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  EXPECT_EQ(slurp(path("a.json")),
            emit(split(load(slurp(path("dw.json"))), {0.8, 42, StratifyBy::kCategory})));
  EXPECT_EQ(run({"split", "-i", path("dw.json"), "--ratio", "1.5"}).code, cli::kExitUsage);
}

TEST_F(CliTest, EvalDetOnPerfectPredictions) {
  ingest_fixture("dw.json");
  const auto ds = load(slurp(path("dw.json")));
  std::vector<DetectionRecord> dets;
  for (const auto& a : ds.annotations) dets.push_back({a.image_id, a.category_id, a.bbox, 0.9});
  spit(path("dets.json"), emit_detections(dets));
  const auto r = run({"eval-det", "-i", path("dets.json"), "--dataset", path("dw.json"), "--preset",
                      "coco", "-o", path("summary.json"), "--pr-csv", path("pr.csv")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto summary = evaluate(dets, ds, IoUThresholds::coco());
  EXPECT_EQ(summary.map_50_95, 1.0);
  EXPECT_EQ(summary.ap_50, 1.0);
  EXPECT_EQ(summary.ap_75, 1.0);
  EXPECT_EQ(slurp(path("summary.json")), emit_summary(summary));
  EXPECT_FALSE(slurp(path("pr.csv")).empty());

  const auto text = run({"eval-det", "-i", path("dets.json"), "--dataset", path("dw.json"), "--text"});
  EXPECT_NE(text.out.find("100.0"), std::string::npos);
  EXPECT_EQ(run({"eval-det", "-i", path("dets.json"), "--dataset", path("dw.json"), "--preset",
                 "voc50", "--iou", "0.6"})
                .code,
            cli::kExitUsage);
}

TEST_F(CliTest, CropsClassifyCompose) {
  ingest_fixture("dw.json");
  const auto ds = load(slurp(path("dw.json")));
  std::vector<DetectionRecord> dets;
  for (const auto& a : ds.annotations) dets.push_back({a.image_id, kLitterCategoryId, a.bbox, 0.7});
  spit(path("dets.json"), emit_detections(dets));
  ASSERT_EQ(run({"crops", "-i", path("dw.json"), "--detections", path("dets.json"), "--margin", "0.1",
                 "-o", path("crops.json")})
                .code,
            0);
  const auto crops = load_crop_manifest(slurp(path("crops.json")));
  ASSERT_EQ(crops.size(), dets.size());
  std::vector<ClassPrediction> preds = {{1, TargetClass::kGlass, 0.9}, {2, TargetClass::kBackground, 0.99}};
  spit(path("preds.json"), emit_class_predictions(preds));
  const auto r = run({"compose", "--detections", path("dets.json"), "--crops", path("crops.json"),
                      "--predictions", path("preds.json")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto out = load_detections(r.out);
  EXPECT_EQ(out.size(), dets.size() - 1);
  EXPECT_EQ(out[0].category_id, category_id(TargetClass::kGlass));
  EXPECT_EQ(out[1].category_id, kLitterCategoryId);

  spit(path("truth.json"), R"([{"crop_id": 1, "label": "glass"}, {"crop_id": 2, "label": "paper"}])");
  const auto c = run({"eval-cls", "-i", path("preds.json"), "--truth", path("truth.json")});
  ASSERT_EQ(c.code, cli::kExitOk) << c.err;
  EXPECT_NE(c.out.find("\"accuracy\": 0.5"), std::string::npos) << c.out;
}

TEST_F(CliTest, PseudoLabelReplay) {
  spit(path("labels.json"), R"([{"crop_id": 1, "label": "bio"}])");
  spit(path("pool.json"), emit_crop_manifest(std::vector<CropRecord>{
                              {1, 1, {0, 0, 5, 5}, std::nullopt, 0},
                              {2, 1, {0, 0, 5, 5}, std::nullopt, 0},
                              {3, 1, {0, 0, 5, 5}, std::nullopt, 0}}));
  spit(path("r0.json"), emit_round({0, 0, {{2, TargetClass::kGlass, 0.9}, {3, TargetClass::kPaper, 0.2}}}));
  spit(path("r1.json"), emit_round({1, 1, {{2, TargetClass::kPaper, 0.95}}}));
  const auto r = run({"pseudo-label", "--labels", path("labels.json"), "--pool", path("pool.json"),
                      "--round", path("r0.json"), "--round", path("r1.json"), "--weights",
                      path("w.json"), "--view", path("view.json"), "--history", path("h.json"),
                      "-o", path("state.json")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto state = load_state(slurp(path("state.json")));
  EXPECT_EQ(state.assigned.size(), 1u);
  EXPECT_EQ(state.assigned.at(2), (Assignment{TargetClass::kPaper, 0.95, 1}));
  EXPECT_EQ(state.pool, (std::set<Id>{2, 3}));
  EXPECT_FALSE(slurp(path("w.json")).empty());

  // Same epoch twice is rejected in per-epoch mode.
  spit(path("r1b.json"), emit_round({1, 0, {}}));
  const auto same_epoch = run({"pseudo-label", "--labels", path("labels.json"), "--pool",
                               path("pool.json"), "--round", path("r0.json"), "--round",
                               path("r1b.json")});
  EXPECT_EQ(same_epoch.code, cli::kExitData);
  EXPECT_NE(same_epoch.err.find("epoch"), std::string::npos);
  EXPECT_EQ(run({"pseudo-label", "--labels", path("labels.json"), "--pool", path("pool.json"),
                 "--round", path("r0.json"), "--round", path("r1b.json"), "--mode", "per-batch"})
                .code,
            cli::kExitOk);
  EXPECT_EQ(run({"pseudo-label", "--labels", path("labels.json"), "--round", path("r0.json"),
                 "--round", path("r1b.json"), "--mode", "per-batch"})
                .code,
            cli::kExitData);  // crop 2 is not in the (empty) pool
}

TEST_F(CliTest, MergeCollapseValidate) {
  ingest_fixture("dw.json");
  ASSERT_EQ(run({"merge", "-i", path("dw.json"), "-i", path("dw.json"), "-o", path("m.json")}).code, 0);
  const auto merged = load(slurp(path("m.json")));
  EXPECT_EQ(merged.images.size(), 12u);
  EXPECT_EQ(merged.annotations.size(), 14u);
  ASSERT_EQ(run({"collapse", "-i", path("m.json"), "-o", path("c.json")}).code, 0);
  EXPECT_EQ(load(slurp(path("c.json"))).categories.size(), 1u);
  EXPECT_EQ(run({"validate", "-i", path("c.json")}).code, cli::kExitOk);

  auto broken = merged;
  broken.annotations[0].image_id = 999;
  spit(path("broken.json"), emit(broken));
  const auto v = run({"validate", "-i", path("broken.json")});
  EXPECT_EQ(v.code, cli::kExitData);
  EXPECT_NE(v.err.find("dangling image_id"), std::string::npos);
}

TEST_F(CliTest, UsageAndDataErrors) {
  const auto unknown = run({"frobnicate"});
  EXPECT_EQ(unknown.code, cli::kExitUsage);
  EXPECT_NE(unknown.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"stats"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"--version"}).code, cli::kExitOk);

  spit(path("bad.json"), "{ not json");
  const auto bad = run({"stats", "-i", path("bad.json")});
  EXPECT_EQ(bad.code, cli::kExitData);
  EXPECT_NE(bad.err.find("parse error"), std::string::npos);
  EXPECT_EQ(run({"stats", "-i", path("missing.json")}).code, cli::kExitData);
  spit(path("coco.json"), R"({"images": [], "annotations": []})");
  const auto schema = run({"ingest", "--format", "coco", "-i", path("coco.json")});
  EXPECT_EQ(schema.code, cli::kExitData);
  EXPECT_NE(schema.err.find("categories"), std::string::npos);
}

TEST_F(CliTest, MetaOnlyWhenRequested) {
  ingest_fixture("dw.json");
  const auto plain = run({"stats", "-i", path("dw.json")});
  const auto meta = run({"--meta", "stats", "-i", path("dw.json")});
  EXPECT_EQ(plain.out.find("\"meta\""), std::string::npos);
  EXPECT_NE(meta.out.find("\"meta\""), std::string::npos);
}

}  // namespace
}  // namespace wastekit
