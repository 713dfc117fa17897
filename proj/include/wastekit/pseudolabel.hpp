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

// Pseudo-label bookkeeping: unlabeled pool items receive model-predicted
// classes round by round, and the union with the human labels forms the
// training view. No model is run here; rounds arrive as prediction files.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wastekit/model.hpp"

namespace wastekit {

enum class UpdateMode : std::uint8_t { kPerBatch, kPerEpoch, kNone };

std::string_view to_string(UpdateMode m);
/// Accepts "per-batch"/"per_batch", "per-epoch"/"per_epoch" and "none".
std::optional<UpdateMode> parse_update_mode(std::string_view name);

inline constexpr double kDefaultPseudoThreshold = 0.5;

struct Assignment {
  TargetClass label = TargetClass::kUnknown;
  double score = 0;
  std::int64_t round_index = 0;

  bool operator==(const Assignment&) const = default;
};

struct PseudoLabelState {
  std::map<Id, TargetClass> labeled;  // human labels, never overwritten
  std::set<Id> pool;                  // unlabeled crop ids
  std::map<Id, Assignment> assigned;  // subset of pool
  double threshold = kDefaultPseudoThreshold;
  UpdateMode mode = UpdateMode::kPerEpoch;

  bool operator==(const PseudoLabelState&) const = default;
};

/// Builds a state and checks that pool and labeled ids are disjoint.
PseudoLabelState make_state(std::map<Id, TargetClass> labeled, std::set<Id> pool,
                            double threshold = kDefaultPseudoThreshold,
                            UpdateMode mode = UpdateMode::kPerEpoch);

/// Applies one round. Per pool item the highest-scoring prediction wins
/// (ties: first in the list); it replaces any earlier assignment when its
/// score reaches the threshold and is otherwise discarded, leaving the old
/// assignment in place. In kNone mode only round 0 is applied.
///
/// Throws DataError for predictions on labeled or unknown crop ids.
PseudoLabelState assign(const PseudoLabelState& state, std::span<const ClassPrediction> predictions,
                        std::int64_t round_index);

/// Human labels plus current assignments.
std::map<Id, TargetClass> training_view(const PseudoLabelState& state);

struct PredictionRound {
  std::int64_t round_index = 0;
  std::int64_t epoch = 0;
  std::vector<ClassPrediction> predictions;
};

/// Folds `assign` over the rounds and returns the state after each one.
/// Round indices must strictly increase and epochs must not decrease; in
/// kPerEpoch mode each epoch may appear only once.
std::vector<PseudoLabelState> replay(const PseudoLabelState& initial,
                                     std::span<const PredictionRound> rounds);

/// Exact weight N / (K * n_c) as a fraction.
struct Rational {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;

  double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
};

/// Inverse class frequency weights, normalized to mean 1, so that every
/// present class has the same expected share under weighted sampling.
struct SamplerWeights {
  std::map<Id, double> weights;
  std::map<TargetClass, Rational> per_class;
  std::map<TargetClass, std::int64_t> class_counts;
};

/// Throws DataError on an empty label map.
SamplerWeights sampler_weights(const std::map<Id, TargetClass>& label_map);

/// Draws crop ids with probability proportional to their weight.
class WeightedSampler {
 public:
  WeightedSampler(const SamplerWeights& weights, std::uint64_t seed);

  Id next();

 private:
  std::vector<Id> ids_;
  std::discrete_distribution<std::size_t> dist_;
  std::mt19937_64 rng_;
};

PredictionRound load_round(std::string_view text);
std::string emit_round(const PredictionRound& round);

std::string emit_state(const PseudoLabelState& state);
PseudoLabelState load_state(std::string_view text);

std::string emit_weights(const SamplerWeights& weights);

/// Crop-id -> label file ([{"crop_id", "label"}]) from a label map.
std::string emit_label_map(const std::map<Id, TargetClass>& labels);

}  // namespace wastekit
