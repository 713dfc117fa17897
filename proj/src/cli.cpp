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

#include "wastekit/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json_util.hpp"
#include "wastekit/classify_eval.hpp"
#include "wastekit/curate.hpp"
#include "wastekit/detect_eval.hpp"
#include "wastekit/ingest.hpp"
#include "wastekit/pseudolabel.hpp"
#include "wastekit/taxonomy.hpp"

namespace wastekit::cli {
namespace {

namespace fs = std::filesystem;
using detail::json;

constexpr std::string_view kVersion = "0.1.0";

// Usage problems detected after CLI11 parsing (conflicting flags).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool meta = false;
  std::vector<std::string> args;

  // Writes to `path`, or to `out` when the path is empty. With --meta,
  // JSON object documents gain a "meta" block.
  void write(const std::string& path, std::string text) const {
    if (meta) text = with_meta(text);
    if (path.empty()) {
      out << text;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write '" + path + "'");
    f << text;
  }

  std::string with_meta(const std::string& text) const {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error&) {
      return text;
    }
    if (!doc.is_object()) return text;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    doc["meta"] = {{"tool", "wastekit"}, {"version", std::string(kVersion)},
                   {"arguments", args}, {"created", stamp}};
    return detail::dump_json(doc);
  }

  void warn_all(const Warnings& warnings) const {
    for (const auto& w : warnings) err << "warning: " << w << "\n";
  }
};

Dataset read_dataset(const std::string& path) { return load(read_file(path)); }

std::map<std::string, ImageSize> read_dims(const std::string& path) {
  const json doc = detail::parse_json(read_file(path));
  if (!doc.is_object()) throw SchemaError("", "dimension file must map file names to [width, height]");
  std::map<std::string, ImageSize> dims;
  for (const auto& [name, v] : doc.items()) {
    if (!v.is_array() || v.size() != 2) {
      throw SchemaError(name, "dimensions of '" + name + "' must be [width, height]");
    }
    dims[name] = {detail::as_int(v[0], name), detail::as_int(v[1], name)};
  }
  return dims;
}

// A JSON array of names or one name per line.
std::vector<std::string> read_class_names(const std::string& path) {
  const auto text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    const json doc = detail::parse_json(text);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < doc.size(); ++i) {
      names.push_back(detail::as_string(doc[i], detail::index_path("classes", i)));
    }
    return names;
  }
  std::vector<std::string> names;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  return names;
}

std::string default_source(const std::string& input) {
  fs::path p(input);
  if (fs::is_directory(p)) return p.lexically_normal().filename().string().empty()
                                      ? p.lexically_normal().parent_path().filename().string()
                                      : p.lexically_normal().filename().string();
  return p.stem().string();
}

Dataset ingest_yolo_dir(const std::string& dir, const std::string& dims_path,
                        const std::string& classes_path, const std::string& source,
                        Warnings& warnings) {
  const auto dims = read_dims(dims_path);
  std::map<std::string, std::string> stem_to_image;
  for (const auto& [name, _] : dims) stem_to_image[fs::path(name).stem().string()] = name;

  std::map<std::string, std::string> labels;
  if (!fs::is_directory(dir)) throw DataError("'" + dir + "' is not a directory");
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    const auto stem = entry.path().stem().string();
    auto it = stem_to_image.find(stem);
    if (it == stem_to_image.end()) {
      throw DataError("no image dimensions known for label file '" + entry.path().filename().string() + "'");
    }
    labels[it->second] = read_file(entry.path().string());
  }
  return ingest_yolo(labels, dims, read_class_names(classes_path), source, &warnings);
}

Dataset ingest_labels(const std::string& input, const std::string& dims_path,
                      const std::string& source) {
  std::map<std::string, std::vector<std::string>> manifest;
  if (fs::is_directory(input)) {
    for (const auto& cls : fs::directory_iterator(input)) {
      if (!cls.is_directory()) continue;
      auto& files = manifest[cls.path().filename().string()];
      for (const auto& f : fs::directory_iterator(cls.path())) {
        if (f.is_regular_file()) files.push_back(f.path().filename().string());
      }
      std::sort(files.begin(), files.end());
    }
  } else {
    const json doc = detail::parse_json(read_file(input));
    if (!doc.is_object()) throw SchemaError("", "label manifest must map class names to file lists");
    for (const auto& [cls, files] : doc.items()) {
      if (!files.is_array()) throw SchemaError(cls, "files of class '" + cls + "' must be an array");
      for (const auto& f : files) manifest[cls].push_back(detail::as_string(f, cls));
    }
  }
  return ingest_label_dirs(manifest, read_dims(dims_path), source);
}

std::map<Id, TargetClass> read_label_map(const std::string& path) {
  std::map<Id, TargetClass> labels;
  for (const auto& p : load_class_predictions(read_file(path), false)) {
    if (!labels.emplace(p.crop_id, p.label).second) {
      throw DataError("crop " + std::to_string(p.crop_id) + " is labeled twice in '" + path + "'");
    }
  }
  return labels;
}

std::string violations_json(const std::vector<Violation>& violations) {
  json doc = json::array();
  for (const auto& v : violations) doc.push_back({{"record", v.record}, {"id", v.id}, {"rule", v.rule}});
  return detail::dump_json(doc);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err, false, args};

  CLI::App app{"wastekit: waste dataset curation and detection/classification evaluation",
               "wastekit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--meta", ctx.meta, "Add a provenance block (with timestamp) to JSON object outputs");
  app.set_version_flag("--version", std::string(kVersion));

  // Option storage shared by subcommands.
  std::vector<std::string> inputs;
  std::string output;
  std::string format;
  std::string source;
  std::string dims;
  std::string classes;
  std::string taxonomy;
  double ratio = 0.8;
  std::uint64_t seed = 0;
  std::string stratify = "category";
  double margin = 0.0;
  std::optional<double> iou_value;
  std::string preset = "coco";
  int interp = 101;
  std::string scope = "auto";
  std::string pr_csv;
  std::string dataset_path;
  std::string detections_path;
  std::string crops_path;
  std::string predictions_path;
  std::string truth_path;
  bool text = false;
  std::optional<double> threshold;
  std::optional<std::string> mode;
  std::string state_path;
  std::string labels_path;
  std::string pool_path;
  std::vector<std::string> rounds;
  std::string history_path;
  std::string weights_path;
  std::string view_path;

  auto* ingest = app.add_subcommand("ingest", "Convert a COCO, YOLO or label-folder source to the interchange format");
  ingest->add_option("--format", format, "Source format")
      ->required()
      ->check(CLI::IsMember({"coco", "yolo", "labels", "interchange"}));
  ingest->add_option("-i,--input", inputs, "COCO file, YOLO label directory, label folder/manifest")
      ->required()
      ->expected(1);
  ingest->add_option("--source", source, "Source dataset name (default: input name)");
  ingest->add_option("--dims", dims, "JSON map file_name -> [width, height] (yolo, labels)");
  ingest->add_option("--classes", classes, "Class names, one per line or JSON array (yolo)");
  ingest->add_option("-o,--output", output, "Output interchange file (default: stdout)");

  auto* map_cmd = app.add_subcommand("map", "Retarget categories through a taxonomy file");
  map_cmd->add_option("-i,--input", inputs, "Interchange dataset")->required()->expected(1);
  map_cmd->add_option("--taxonomy", taxonomy, "Taxonomy JSON file")->required();
  map_cmd->add_option("-o,--output", output, "Output interchange file");

  auto* collapse = app.add_subcommand("collapse", "Collapse every category into 'litter'");
  collapse->add_option("-i,--input", inputs, "Interchange dataset")->required()->expected(1);
  collapse->add_option("-o,--output", output, "Output interchange file");

  auto* merge_cmd = app.add_subcommand("merge", "Merge interchange datasets");
  merge_cmd->add_option("-i,--input", inputs, "Interchange dataset (repeatable)")->required();
  merge_cmd->add_option("-o,--output", output, "Output interchange file");

  auto* split_cmd = app.add_subcommand("split", "Stratified train/test split");
  split_cmd->add_option("-i,--input", inputs, "Interchange dataset")->required()->expected(1);
  split_cmd->add_option("--ratio", ratio, "Train fraction in (0, 1)");
  split_cmd->add_option("--seed", seed, "Permutation seed");
  split_cmd->add_option("--stratify", stratify, "Stratum key")
      ->check(CLI::IsMember({"category", "source", "none"}));
  split_cmd->add_option("-o,--output", output, "Output interchange file");

  auto* stats_cmd = app.add_subcommand("stats", "Image/instance counts and size histogram");
  stats_cmd->add_option("-i,--input", inputs, "Interchange dataset")->required()->expected(1);
  stats_cmd->add_option("-o,--output", output, "Output JSON file");
  stats_cmd->add_flag("--text", text, "Print the plain-text table to stdout");

  auto* crops_cmd = app.add_subcommand("crops", "Crop manifest from ground truth or detections");
  crops_cmd->add_option("-i,--input", inputs, "Interchange dataset")->required()->expected(1);
  crops_cmd->add_option("--detections", detections_path, "Detection file; crops follow detections instead of ground truth");
  crops_cmd->add_option("--margin", margin, "Margin as a fraction of max(w, h)")->check(CLI::NonNegativeNumber);
  crops_cmd->add_option("-o,--output", output, "Output manifest file");

  auto* evald = app.add_subcommand("eval-det", "Detection AP summary");
  evald->add_option("-i,--input", inputs, "Detection file (COCO results layout)")->required()->expected(1);
  evald->add_option("--dataset", dataset_path, "Ground-truth interchange dataset")->required();
  auto* preset_opt = evald->add_option("--preset", preset, "IoU preset")
                         ->check(CLI::IsMember({"voc50", "voc75", "coco"}));
  evald->add_option("--iou", iou_value, "Single IoU threshold in (0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->excludes(preset_opt);
  evald->add_option("--interp", interp, "Recall points: 101 (COCO) or 11 (VOC)")
      ->check(CLI::IsMember({101, 11}));
  evald->add_option("--scope", scope, "Images to evaluate")->check(CLI::IsMember({"auto", "test", "all"}));
  evald->add_option("--pr-csv", pr_csv, "Write interpolated PR points as CSV");
  evald->add_option("-o,--output", output, "Output summary JSON");
  evald->add_flag("--text", text, "Print the plain-text table to stdout");

  auto* evalc = app.add_subcommand("eval-cls", "Classification report and confusion matrix");
  evalc->add_option("-i,--input", inputs, "Classification prediction file")->required()->expected(1);
  evalc->add_option("--truth", truth_path, "Ground-truth label file")->required();
  evalc->add_option("-o,--output", output, "Output report JSON");
  evalc->add_flag("--text", text, "Print the plain-text table to stdout");

  auto* pseudo = app.add_subcommand("pseudo-label", "Replay pseudo-label rounds");
  auto* state_opt = pseudo->add_option("--state", state_path, "Initial state snapshot");
  auto* labels_opt = pseudo->add_option("--labels", labels_path, "Human labels [{crop_id, label}]")->excludes(state_opt);
  pseudo->add_option("--pool", pool_path, "Crop manifest of the unlabeled pool")->needs(labels_opt);
  pseudo->add_option("-i,--input,--round", rounds, "Round file (repeatable, in order)");
  pseudo->add_option("--threshold", threshold, "Acceptance threshold in [0, 1]")->check(CLI::Range(0.0, 1.0));
  pseudo->add_option("--mode", mode, "Update schedule")
      ->check(CLI::IsMember({"per-batch", "per-epoch", "none", "per_batch", "per_epoch"}));
  pseudo->add_option("-o,--output", output, "Final state snapshot");
  pseudo->add_option("--history", history_path, "All intermediate states as a JSON array");
  pseudo->add_option("--weights", weights_path, "Sampler weights of the final training view");
  pseudo->add_option("--view", view_path, "Final training view as a label file");

  auto* compose = app.add_subcommand("compose", "Relabel detections with crop classifications");
  compose->add_option("--detections", detections_path, "Stage-1 detection file")->required();
  compose->add_option("--crops", crops_path, "Crop manifest built from those detections")->required();
  compose->add_option("--predictions", predictions_path, "Stage-2 classification file")->required();
  compose->add_option("-o,--output", output, "Output detection file");

  auto* validate_cmd = app.add_subcommand("validate", "List invariant violations of a dataset");
  validate_cmd->add_option("-i,--input", inputs, "Interchange dataset")->required()->expected(1);
  validate_cmd->add_option("-o,--output", output, "Output violations JSON");

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("wastekit");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    const std::string in = inputs.empty() ? std::string() : inputs.front();
    if (ingest->parsed()) {
      const std::string name = source.empty() ? default_source(in) : source;
      Warnings warnings;
      Dataset ds;
      if (format == "coco") {
        ds = ingest_coco(read_file(in), name, &warnings);
      } else if (format == "yolo") {
        if (dims.empty() || classes.empty()) throw UsageError("--format yolo needs --dims and --classes");
        ds = ingest_yolo_dir(in, dims, classes, name, warnings);
      } else if (format == "labels") {
        if (dims.empty()) throw UsageError("--format labels needs --dims");
        ds = ingest_labels(in, dims, name);
      } else {
        ds = read_dataset(in);
      }
      ctx.warn_all(warnings);
      ctx.write(output, emit(ds));
    } else if (map_cmd->parsed()) {
      ctx.write(output, emit(map_categories(read_dataset(in), load_taxonomy(read_file(taxonomy)))));
    } else if (collapse->parsed()) {
      ctx.write(output, emit(collapse_to_single_class(read_dataset(in))));
    } else if (merge_cmd->parsed()) {
      std::vector<Dataset> parts;
      for (const auto& p : inputs) parts.push_back(read_dataset(p));
      ctx.write(output, emit(merge(parts)));
    } else if (split_cmd->parsed()) {
      if (!(ratio > 0.0 && ratio < 1.0)) throw UsageError("--ratio must lie in (0, 1)");
      SplitSpec spec{ratio, seed, *parse_stratify(stratify)};
      ctx.write(output, emit(split(read_dataset(in), spec)));
    } else if (stats_cmd->parsed()) {
      const auto s = stats(read_dataset(in));
      if (text) out << format_stats_table(s);
      if (!text || !output.empty()) ctx.write(output, emit_stats(s));
    } else if (crops_cmd->parsed()) {
      const auto ds = read_dataset(in);
      Warnings warnings;
      std::vector<CropRecord> crops;
      if (detections_path.empty()) {
        crops = crop_manifest(ds, margin, &warnings);
      } else {
        crops = crop_manifest(load_detections(read_file(detections_path)), ds, margin, &warnings);
      }
      ctx.warn_all(warnings);
      ctx.write(output, emit_crop_manifest(crops));
    } else if (evald->parsed()) {
      const auto ds = read_dataset(dataset_path);
      const auto dets = load_detections(read_file(in));
      IoUThresholds thresholds = iou_value ? IoUThresholds({*iou_value})
                                 : preset == "voc50" ? IoUThresholds::voc50()
                                 : preset == "voc75" ? IoUThresholds::voc75()
                                                     : IoUThresholds::coco();
      EvalOptions options;
      options.interpolation = interp == 11 ? Interpolation::kVoc11 : Interpolation::kCoco101;
      options.scope = scope == "test" ? EvalScope::kTestOnly
                      : scope == "all" ? EvalScope::kAllImages
                                       : EvalScope::kAuto;
      options.collect_curves = !pr_csv.empty();
      const auto summary = evaluate(dets, ds, thresholds, options);
      if (!pr_csv.empty()) {
        std::ofstream f(pr_csv, std::ios::binary);
        if (!f) throw DataError("cannot write '" + pr_csv + "'");
        f << format_pr_csv(summary);
      }
      if (text) out << format_summary_table(summary);
      if (!text || !output.empty()) ctx.write(output, emit_summary(summary));
    } else if (evalc->parsed()) {
      const auto preds = load_class_predictions(read_file(in));
      const auto truth = read_label_map(truth_path);
      std::map<Id, TargetClass> predicted;
      for (const auto& p : preds) {
        if (!truth.contains(p.crop_id)) {
          throw DataError("prediction for crop " + std::to_string(p.crop_id) + " has no ground truth");
        }
        if (!predicted.emplace(p.crop_id, p.label).second) {
          throw DataError("crop " + std::to_string(p.crop_id) + " is predicted twice");
        }
      }
      std::vector<TargetClass> t;
      std::vector<TargetClass> p;
      for (const auto& [id, label] : truth) {
        auto it = predicted.find(id);
        if (it == predicted.end()) {
          throw DataError("ground-truth crop " + std::to_string(id) + " has no prediction");
        }
        t.push_back(label);
        p.push_back(it->second);
      }
      const auto matrix = confusion(t, p);
      const auto rep = report(matrix);
      if (text) out << format_report_table(rep);
      if (!text || !output.empty()) ctx.write(output, emit_report(rep, matrix));
    } else if (pseudo->parsed()) {
      PseudoLabelState state;
      if (!state_path.empty()) {
        state = load_state(read_file(state_path));
      } else if (!labels_path.empty()) {
        std::set<Id> pool;
        const auto labeled = read_label_map(labels_path);
        if (!pool_path.empty()) {
          for (const auto& c : load_crop_manifest(read_file(pool_path))) {
            if (!labeled.contains(c.crop_id)) pool.insert(c.crop_id);
          }
        }
        state = make_state(labeled, std::move(pool));
      } else {
        throw UsageError("pseudo-label needs --state or --labels");
      }
      if (threshold) {
        state.threshold = *threshold;
        for (const auto& [id, a] : state.assigned) {
          if (a.score < state.threshold) {
            throw DataError("--threshold exceeds the score of existing assignment for crop " +
                            std::to_string(id));
          }
        }
      }
      if (mode) state.mode = *parse_update_mode(*mode);

      std::vector<PredictionRound> parsed;
      for (const auto& r : rounds) parsed.push_back(load_round(read_file(r)));
      const auto history = replay(state, parsed);
      const PseudoLabelState& final_state = history.empty() ? state : history.back();

      if (!history_path.empty()) {
        json all = json::array();
        for (const auto& s : history) all.push_back(json::parse(emit_state(s)));
        std::ofstream f(history_path, std::ios::binary);
        if (!f) throw DataError("cannot write '" + history_path + "'");
        f << detail::dump_json(all);
      }
      const auto view = training_view(final_state);
      if (!weights_path.empty()) {
        std::ofstream f(weights_path, std::ios::binary);
        if (!f) throw DataError("cannot write '" + weights_path + "'");
        f << emit_weights(sampler_weights(view));
      }
      if (!view_path.empty()) {
        std::ofstream f(view_path, std::ios::binary);
        if (!f) throw DataError("cannot write '" + view_path + "'");
        f << emit_label_map(view);
      }
      ctx.write(output, emit_state(final_state));
    } else if (compose->parsed()) {
      const auto composed = compose_two_stage(load_detections(read_file(detections_path)),
                                              load_crop_manifest(read_file(crops_path)),
                                              load_class_predictions(read_file(predictions_path)));
      ctx.write(output, emit_detections(detections_of(composed)));
    } else if (validate_cmd->parsed()) {
      const auto violations = validate(read_dataset(in));
      for (const auto& v : violations) {
        err << v.record << " " << v.id << ": " << v.rule << "\n";
      }
      ctx.write(output, violations_json(violations));
      return violations.empty() ? kExitOk : kExitData;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "parse error (byte " << e.byte_offset() << "): " << e.what() << "\n";
    return kExitData;
  } catch (const SchemaError& e) {
    err << "schema error [" << e.field() << "]: " << e.what() << "\n";
    return kExitData;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace wastekit::cli
