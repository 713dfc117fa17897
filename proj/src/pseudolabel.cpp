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

#include "wastekit/pseudolabel.hpp"

#include <numeric>

#include "json_util.hpp"

namespace wastekit {
namespace {

using detail::json;

void check_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw DataError("pseudo-label threshold must lie in [0, 1]");
  }
}

void check_invariants(const PseudoLabelState& s) {
  check_threshold(s.threshold);
  for (const auto& [id, _] : s.labeled) {
    if (s.pool.contains(id)) {
      throw DataError("crop " + std::to_string(id) + " is both human-labeled and in the pool");
    }
  }
  for (const auto& [id, a] : s.assigned) {
    if (!s.pool.contains(id)) {
      throw DataError("assigned crop " + std::to_string(id) + " is not in the pool");
    }
    if (a.score < s.threshold) {
      throw DataError("assigned crop " + std::to_string(id) + " has score below the threshold");
    }
  }
}

}  // namespace

std::string_view to_string(UpdateMode m) {
  switch (m) {
    case UpdateMode::kPerBatch:
      return "per_batch";
    case UpdateMode::kPerEpoch:
      return "per_epoch";
    case UpdateMode::kNone:
      break;
  }
  return "none";
}

std::optional<UpdateMode> parse_update_mode(std::string_view name) {
  if (name == "per_batch" || name == "per-batch") return UpdateMode::kPerBatch;
  if (name == "per_epoch" || name == "per-epoch") return UpdateMode::kPerEpoch;
  if (name == "none") return UpdateMode::kNone;
  return std::nullopt;
}

PseudoLabelState make_state(std::map<Id, TargetClass> labeled, std::set<Id> pool, double threshold,
                            UpdateMode mode) {
  PseudoLabelState s{std::move(labeled), std::move(pool), {}, threshold, mode};
  check_invariants(s);
  return s;
}

PseudoLabelState assign(const PseudoLabelState& state, std::span<const ClassPrediction> predictions,
                        std::int64_t round_index) {
  std::map<Id, const ClassPrediction*> winners;
  for (const auto& p : predictions) {
    if (state.labeled.contains(p.crop_id)) {
      throw DataError("prediction for human-labeled crop " + std::to_string(p.crop_id));
    }
    if (!state.pool.contains(p.crop_id)) {
      throw DataError("prediction for crop " + std::to_string(p.crop_id) + " outside the pool");
    }
    auto [it, inserted] = winners.emplace(p.crop_id, &p);
    if (!inserted && p.score > it->second->score) it->second = &p;
  }

  PseudoLabelState next = state;
  if (state.mode == UpdateMode::kNone && round_index > 0) return next;
  for (const auto& [id, p] : winners) {
    if (p->score >= state.threshold) next.assigned[id] = {p->label, p->score, round_index};
  }
  return next;
}

std::map<Id, TargetClass> training_view(const PseudoLabelState& state) {
  std::map<Id, TargetClass> view = state.labeled;
  for (const auto& [id, a] : state.assigned) {
    auto [it, inserted] = view.emplace(id, a.label);
    if (!inserted) {
      throw DataError("crop " + std::to_string(id) + " carries both a human and a pseudo label");
    }
  }
  return view;
}

std::vector<PseudoLabelState> replay(const PseudoLabelState& initial,
                                     std::span<const PredictionRound> rounds) {
  std::vector<PseudoLabelState> states;
  states.reserve(rounds.size());
  const PseudoLabelState* current = &initial;
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    const auto& r = rounds[i];
    if (i > 0) {
      const auto& prev = rounds[i - 1];
      if (r.round_index <= prev.round_index) {
        throw DataError("round " + std::to_string(r.round_index) + " is out of order after round " +
                        std::to_string(prev.round_index));
      }
      if (r.epoch < prev.epoch) {
        throw DataError("epoch " + std::to_string(r.epoch) + " is out of order after epoch " +
                        std::to_string(prev.epoch));
      }
      if (initial.mode == UpdateMode::kPerEpoch && r.epoch == prev.epoch) {
        throw DataError("per-epoch mode allows one round per epoch; epoch " +
                        std::to_string(r.epoch) + " repeats");
      }
    }
    states.push_back(assign(*current, r.predictions, r.round_index));
    current = &states.back();
  }
  return states;
}

SamplerWeights sampler_weights(const std::map<Id, TargetClass>& label_map) {
  if (label_map.empty()) throw DataError("cannot weight an empty label map");
  SamplerWeights w;
  for (const auto& [_, c] : label_map) ++w.class_counts[c];
  const auto n = static_cast<std::int64_t>(label_map.size());
  const auto k = static_cast<std::int64_t>(w.class_counts.size());
  for (const auto& [c, count] : w.class_counts) {
    std::int64_t num = n;
    std::int64_t den = k * count;
    const auto g = std::gcd(num, den);
    w.per_class[c] = {num / g, den / g};
  }
  for (const auto& [id, c] : label_map) w.weights[id] = w.per_class.at(c).value();
  return w;
}

WeightedSampler::WeightedSampler(const SamplerWeights& weights, std::uint64_t seed) : rng_(seed) {
  std::vector<double> values;
  values.reserve(weights.weights.size());
  for (const auto& [id, v] : weights.weights) {
    ids_.push_back(id);
    values.push_back(v);
  }
  if (ids_.empty()) throw DataError("cannot sample from empty weights");
  dist_ = std::discrete_distribution<std::size_t>(values.begin(), values.end());
}

Id WeightedSampler::next() { return ids_[dist_(rng_)]; }

PredictionRound load_round(std::string_view text) {
  const json doc = detail::parse_json(text);
  if (!doc.is_object()) throw SchemaError("", "round file must be a JSON object");
  PredictionRound r;
  r.round_index = detail::require_int(doc, "round_index", "");
  r.epoch = detail::require_int(doc, "epoch", "");
  const auto& preds = detail::require_array(doc, "predictions", "");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto path = detail::index_path("predictions", i);
    ClassPrediction p;
    p.crop_id = detail::require_int(preds[i], "crop_id", path);
    p.label = detail::parse_label(detail::require(preds[i], "label", path), path + ".label");
    p.score = detail::require_number(preds[i], "score", path);
    if (!(p.score >= 0.0 && p.score <= 1.0)) {
      throw SchemaError(path + ".score", "score outside [0, 1] at " + path);
    }
    r.predictions.push_back(p);
  }
  return r;
}

std::string emit_round(const PredictionRound& round) {
  nlohmann::ordered_json preds = nlohmann::ordered_json::array();
  for (const auto& p : round.predictions) {
    nlohmann::ordered_json rec;
    rec["crop_id"] = p.crop_id;
    rec["label"] = std::string(to_string(p.label));
    rec["score"] = p.score;
    preds.push_back(std::move(rec));
  }
  nlohmann::ordered_json doc;
  doc["round_index"] = round.round_index;
  doc["epoch"] = round.epoch;
  doc["predictions"] = std::move(preds);
  return doc.dump(2) + "\n";
}

std::string emit_state(const PseudoLabelState& state) {
  json labeled = json::array();
  for (const auto& [id, c] : state.labeled) {
    labeled.push_back({{"crop_id", id}, {"label", std::string(to_string(c))}});
  }
  json assigned = json::array();
  for (const auto& [id, a] : state.assigned) {
    assigned.push_back({{"crop_id", id},
                        {"label", std::string(to_string(a.label))},
                        {"score", a.score},
                        {"round_index", a.round_index}});
  }
  json doc = {{"labeled", std::move(labeled)},
              {"pool", state.pool},
              {"assigned", std::move(assigned)},
              {"threshold", state.threshold},
              {"mode", std::string(to_string(state.mode))}};
  return detail::dump_json(doc);
}

PseudoLabelState load_state(std::string_view text) {
  const json doc = detail::parse_json(text);
  if (!doc.is_object()) throw SchemaError("", "state snapshot must be a JSON object");
  PseudoLabelState s;
  const auto& labeled = detail::require_array(doc, "labeled", "");
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    const auto path = detail::index_path("labeled", i);
    const auto id = detail::require_int(labeled[i], "crop_id", path);
    const auto label = detail::parse_label(detail::require(labeled[i], "label", path), path + ".label");
    if (!s.labeled.emplace(id, label).second) {
      throw SchemaError(path + ".crop_id", "duplicate labeled crop " + std::to_string(id));
    }
  }
  const auto& pool = detail::require_array(doc, "pool", "");
  for (std::size_t i = 0; i < pool.size(); ++i) {
    s.pool.insert(detail::as_int(pool[i], detail::index_path("pool", i)));
  }
  const auto& assigned = detail::require_array(doc, "assigned", "");
  for (std::size_t i = 0; i < assigned.size(); ++i) {
    const auto path = detail::index_path("assigned", i);
    const auto id = detail::require_int(assigned[i], "crop_id", path);
    Assignment a;
    a.label = detail::parse_label(detail::require(assigned[i], "label", path), path + ".label");
    a.score = detail::require_number(assigned[i], "score", path);
    a.round_index = detail::require_int(assigned[i], "round_index", path);
    if (!s.assigned.emplace(id, a).second) {
      throw SchemaError(path + ".crop_id", "duplicate assigned crop " + std::to_string(id));
    }
  }
  s.threshold = detail::require_number(doc, "threshold", "");
  const auto mode = detail::require_string(doc, "mode", "");
  auto parsed = parse_update_mode(mode);
  if (!parsed) throw SchemaError("mode", "unknown pseudo-label mode '" + mode + "'");
  s.mode = *parsed;
  check_invariants(s);
  return s;
}

std::string emit_weights(const SamplerWeights& weights) {
  json per_class = json::object();
  for (const auto& [c, r] : weights.per_class) {
    per_class[std::string(to_string(c))] = {{"items", weights.class_counts.at(c)},
                                            {"numerator", r.numerator},
                                            {"denominator", r.denominator},
                                            {"weight", r.value()}};
  }
  json items = json::array();
  for (const auto& [id, w] : weights.weights) items.push_back({{"crop_id", id}, {"weight", w}});
  return detail::dump_json({{"per_class", std::move(per_class)}, {"weights", std::move(items)}});
}

std::string emit_label_map(const std::map<Id, TargetClass>& labels) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& [id, c] : labels) {
    nlohmann::ordered_json rec;
    rec["crop_id"] = id;
    rec["label"] = std::string(to_string(c));
    doc.push_back(std::move(rec));
  }
  return doc.dump(2) + "\n";
}

}  // namespace wastekit
