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

// Acceptance checks. Usage: acceptance [criterion ...]; with no argument
// every criterion runs. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/detect_oracle.hpp"
#include "oracles/reference_rows.hpp"
#include "oracles/replay_oracle.hpp"
#include "oracles/split_oracle.hpp"
#include "support/generators.hpp"
#include "wastekit/classify_eval.hpp"
#include "wastekit/curate.hpp"
#include "wastekit/detect_eval.hpp"
#include "wastekit/ingest.hpp"
#include "wastekit/pseudolabel.hpp"
#include "wastekit/taxonomy.hpp"

namespace {

using namespace wastekit;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

Outcome detection_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20260101);
  const auto thresholds = IoUThresholds::coco();
  double worst = 0;
  int instances = 0;
  for (; instances < 1200; ++instances) {
    const auto inst = oracle::random_instance(rng, 20, 10, 30, 7);
    const auto got = evaluate(inst.detections, inst.dataset, thresholds);
    const auto want = oracle::reference_evaluate(inst.detections, inst.dataset, thresholds.values());
    auto cmp = [&](const ApFields& g, const oracle::OracleFields& w) {
      for (auto [a, b] : {std::pair{g.map_50_95, w.map}, {g.ap_50, w.ap50}, {g.ap_75, w.ap75},
                          {g.ap_small, w.small}, {g.ap_medium, w.medium}, {g.ap_large, w.large}}) {
        worst = std::max(worst, std::fabs(a - b));
      }
    };
    cmp(got, want.overall);
    if (got.per_class.size() != want.per_class.size()) return {false, "per-class keys differ"};
    for (const auto& [name, w] : want.per_class) {
      auto it = got.per_class.find(name);
      if (it == got.per_class.end()) return {false, "missing class " + name};
      cmp(it->second, w);
    }
  }
  const double elapsed = seconds_since(start);
  const bool pass = worst <= 1e-9 && elapsed < 60.0;
  return {pass, std::to_string(instances) + " instances, max |diff| " + fmt("%.3g", worst) +
                    fmt(", %.2f s (limit 60 s)", elapsed)};
}

Outcome ap_staircase() {
  const std::vector<AnnotationRecord> gts = {{1, 1, 1, {0, 0, 10, 10}, 100, "s", false},
                                             {2, 1, 1, {20, 20, 10, 10}, 100, "s", false}};
  const std::vector<DetectionRecord> dets = {{1, 1, {0, 0, 10, 10}, 0.9},
                                             {1, 1, {50, 50, 10, 10}, 0.8},
                                             {1, 1, {20, 20, 10, 10}, 0.7}};
  const double ap = average_precision(dets, gts, 0.5);
  const double enumerated = oracle::staircase_ap({true, false, true}, 2);
  const bool pass = std::fabs(ap - 0.8350) <= 1e-4 && std::fabs(ap - enumerated) <= 1e-4;
  return {pass, fmt("AP %.6f, enumerated staircase %.6f, target 0.8350 +- 1e-4", ap, enumerated)};
}

Outcome iou_raster() {
  std::mt19937_64 rng(77);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    auto r = [&](int lo, int hi) { return testing::uniform_int(rng, lo, hi); };
    const int ax = r(0, 40), ay = r(0, 40), aw = r(1, 30), ah = r(1, 30);
    const int bx = r(0, 40), by = r(0, 40), bw = r(1, 30), bh = r(1, 30);
    const double closed = iou({1.0 * ax, 1.0 * ay, 1.0 * aw, 1.0 * ah}, {1.0 * bx, 1.0 * by, 1.0 * bw, 1.0 * bh});
    worst = std::max(worst, std::fabs(closed - oracle::raster_iou(ax, ay, aw, ah, bx, by, bw, bh)));
  }
  return {worst <= 1e-12, "10000 box pairs, max |diff| " + fmt("%.3g (limit 1e-12)", worst)};
}

Outcome f1_reference_rows() {
  bool pass = true;
  std::string detail;
  for (const auto& row : oracle::kF1Rows) {
    const auto rep = report(oracle::matrix_for_row(row));
    const double f1 = rep.per_class[0].f1;
    const double shown = round_to(f1, 2);
    const bool ok = std::lround(shown * 100) == row.f1;
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += std::string(to_string(row.label)) + fmt(" %.2f/%.2f", row.precision / 100.0, row.recall / 100.0) +
              fmt(" -> f1 %.6f = %.2f", f1, shown) + fmt(" (expected %.2f)", row.f1 / 100.0) +
              (ok ? "" : " MISMATCH");
  }
  return {pass, detail};
}

Outcome merge_conservation() {
  struct Row {
    const char* source;
    int classes;
    int images;
    int instances;
  };
  const Row rows[] = {{"extended-taco", 7, 4562, 14286}, {"wade-ai", 1, 1396, 2247},
                      {"uavvaste", 1, 772, 3718},        {"trashcan", 8, 7212, 6214},
                      {"trash-icra19", 7, 7668, 6706},   {"drinking-waste", 4, 4810, 5058},
                      {"mju-waste", 1, 2475, 2532},      {"cigarette-butt", 1, 2200, 2200}};
  std::vector<Dataset> parts;
  for (const auto& r : rows) parts.push_back(testing::shaped_dataset(r.source, r.images, r.instances, r.classes));

  const std::vector<Dataset> pair = {parts[1], parts[2]};
  const auto wade_uav = merge(pair);
  const auto all = merge(parts);
  const auto collapsed = collapse_to_single_class(parts[0]);
  const bool pass = wade_uav.images.size() == 2168 && wade_uav.annotations.size() == 5965 &&
                    all.images.size() == 31095 && all.annotations.size() == 42961 &&
                    collapsed.annotations.size() == 14286 && collapsed.categories.size() == 1 &&
                    validate(all).empty();
  std::ostringstream os;
  os << "wade-ai+uavvaste " << wade_uav.images.size() << "/" << wade_uav.annotations.size()
     << " (expected 2168/5965); all detection rows " << all.images.size() << "/"
     << all.annotations.size() << " (expected 31095/42961); taco collapse "
     << collapsed.annotations.size() << " instances in " << collapsed.categories.size() << " class";
  return {pass, os.str()};
}

Outcome split_properties() {
  std::mt19937_64 rng(500);
  for (int i = 0; i < 500; ++i) {
    const auto ds = testing::random_split_input(rng, 80, 6);
    const auto msg = oracle::check_split(ds, rng(), rng);
    if (!msg.empty()) return {false, "dataset " + std::to_string(i) + ": " + msg};
  }
  return {true, "500 datasets: quotas, partition, permutation invariance, reproducibility"};
}

Outcome round_trip() {
  std::mt19937_64 rng(501);
  for (int i = 0; i < 500; ++i) {
    const auto ds = testing::random_dataset(rng, 20, 60, 8);
    const auto text = emit(ds);
    const auto back = load(text);
    if (!(back == ds)) return {false, "dataset " + std::to_string(i) + ": load(emit(D)) != D"};
    if (emit(back) != text) return {false, "dataset " + std::to_string(i) + ": emit not byte-stable"};
  }
  return {true, "500 datasets: load(emit(D)) == D and emit(load(emit(D))) == emit(D)"};
}

Outcome pseudo_label_replay() {
  std::mt19937_64 rng(502);
  for (int i = 0; i < 200; ++i) {
    const auto h = oracle::random_history(rng);
    const auto states = replay(h.initial, h.rounds);
    if (states.back().assigned != oracle::final_assignments(h.initial, h.rounds)) {
      return {false, "history " + std::to_string(i) + ": final state differs from recomputation"};
    }
    for (const auto& s : states) {
      if (s.labeled != h.initial.labeled) return {false, "history " + std::to_string(i) + ": human labels changed"};
    }
  }

  std::map<Id, TargetClass> labeled;
  std::set<Id> pool;
  PredictionRound round{0, 0, {}};
  Id next = 1;
  for (const auto& [cls, n] : oracle::pool_histogram()) {
    for (std::int64_t k = 0; k < n; ++k, ++next) {
      pool.insert(next);
      round.predictions.push_back({next, cls, 0.9});
    }
  }
  const auto state = make_state(labeled, pool);
  const auto final_state = replay(state, std::vector<PredictionRound>{round}).back();
  std::map<TargetClass, std::int64_t> counts;
  for (const auto& [id, c] : training_view(final_state)) ++counts[c];
  std::ostringstream os;
  bool pass = true;
  for (const auto& [cls, n] : oracle::pool_histogram()) {
    os << to_string(cls) << " " << counts[cls] << "/" << n << " ";
    pass = pass && counts[cls] == n;
  }
  return {pass, "200 histories match; pool histogram " + os.str()};
}

Outcome sampler_uniformity() {
  std::map<Id, TargetClass> labels;
  for (Id id = 1; id <= 1000; ++id) labels[id] = id <= 900 ? TargetClass::kGlass : TargetClass::kPaper;
  WeightedSampler sampler(sampler_weights(labels), 503);
  const int draws = 1000000;
  int glass = 0;
  for (int i = 0; i < draws; ++i) glass += labels.at(sampler.next()) == TargetClass::kGlass;
  const double f_glass = static_cast<double>(glass) / draws;
  const double f_paper = 1.0 - f_glass;
  const bool pass = std::fabs(f_glass - 0.5) <= 0.005 && std::fabs(f_paper - 0.5) <= 0.005;
  return {pass, fmt("10^6 draws on 90%%/10%%: %.4f / %.4f (target 0.50 +- 0.005)", f_glass, f_paper)};
}

Outcome performance() {
  std::mt19937_64 rng(504);
  // 2000 ground truth boxes over 500 images and 7 classes, 10000 detections.
  Dataset ds;
  for (int c = 1; c <= 7; ++c) ds.categories.push_back({c, "c" + std::to_string(c), "s"});
  for (int i = 1; i <= 500; ++i) ds.images.push_back({i, std::to_string(i), 1024, 768, "s", Split::kUnassigned});
  for (int k = 1; k <= 2000; ++k) {
    const double w = testing::uniform_int(rng, 8, 300);
    const double h = testing::uniform_int(rng, 8, 300);
    const BBox b{static_cast<double>(testing::uniform_int(rng, 0, 1024 - 300)),
                 static_cast<double>(testing::uniform_int(rng, 0, 768 - 300)), w, h};
    ds.annotations.push_back({k, 1 + (k - 1) % 500, testing::uniform_int(rng, 1, 7), b, b.area(), "s", false});
  }
  std::vector<DetectionRecord> dets;
  for (int k = 0; k < 10000; ++k) {
    const auto& g = ds.annotations[static_cast<std::size_t>(k % 2000)];
    const double j = testing::uniform_int(rng, -10, 10);
    dets.push_back({g.image_id, testing::uniform_int(rng, 0, 3) ? g.category_id : testing::uniform_int(rng, 1, 7),
                    {std::max(0.0, g.bbox.x + j), std::max(0.0, g.bbox.y - j), g.bbox.w + j / 2, g.bbox.h},
                    testing::uniform_real(rng, 0, 1)});
  }
  auto t0 = Clock::now();
  const auto summary = evaluate(dets, ds, IoUThresholds::coco());
  const double eval_s = seconds_since(t0);

  const std::vector<Dataset> halves = {testing::shaped_dataset("a", 10000, 30000, 7),
                                       testing::shaped_dataset("b", 10000, 30000, 7)};
  t0 = Clock::now();
  const auto merged = merge(halves);
  const auto assigned = split(merged, {0.8, 42, StratifyBy::kCategory});
  const double curate_s = seconds_since(t0);
  const bool pass = eval_s < 1.0 && curate_s < 2.0 && assigned.images.size() == 20000 &&
                    summary.ap_50 >= 0;
  return {pass, fmt("evaluate 10k dets/2k GT/7 classes %.3f s (limit 1 s); merge+split 20k images "
                    "%.3f s (limit 2 s)",
                    eval_s, curate_s)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"detection_oracle", detection_oracle},
      {"ap_staircase", ap_staircase},
      {"iou_raster", iou_raster},
      {"f1_reference_rows", f1_reference_rows},
      {"merge_conservation", merge_conservation},
      {"split_properties", split_properties},
      {"round_trip", round_trip},
      {"pseudo_label_replay", pseudo_label_replay},
      {"sampler_uniformity", sampler_uniformity},
      {"performance", performance},
  };
  std::vector<std::string> selected(argv + 1, argv + argc);
  for (const auto& name : selected) {
    bool known = false;
    for (const auto& [n, _] : criteria) known = known || n == name;
    if (!known) {
      std::fprintf(stderr, "unknown criterion '%s'\n", name.c_str());
      return 2;
    }
  }
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), name) == selected.end()) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
