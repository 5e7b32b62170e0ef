#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "avla/rng.hpp"
#include "avla/suggestion.hpp"
#include "avla/world.hpp"

namespace avla {

// Fixed feature layout. Changing any field changes the parameter
// fingerprint, so banks built under one layout reject parameters from
// another.
//
// Global block:
//   [0, 2)            gripper x/(W-1), y/(H-1)
//   [2, 2+K)          sub-goal completion flags (see completion_flags)
//   2+K               bias (1.0)
// Then one stage block per sub-goal slot; only the block of the active
// sub-goal (first incomplete one) is filled, so each stage gets its own
// linear weights:
//   +0                stage bias (1.0)
//   [+1, +1+E)        held-entity one-hot by layout slot
//   [+1+E, +1+9E)     per entity slot: dx/diam, dy/diam, [dx>0], [dx<0],
//                     [dy>0], [dy<0], [co-located], toggled
// followed by the suggestion block of `suggestion_dim` values.
struct FeatureLayout {
  std::size_t max_entities = 4;
  std::size_t max_subgoals = 6;
  std::size_t suggestion_dim = 64;

  static constexpr std::size_t kPerEntity = 8;

  [[nodiscard]] std::size_t subgoal_offset() const { return 2; }
  [[nodiscard]] std::size_t bias_offset() const { return 2 + max_subgoals; }
  [[nodiscard]] std::size_t stage_dim() const { return 1 + max_entities + kPerEntity * max_entities; }
  [[nodiscard]] std::size_t stage_offset(std::size_t stage) const {
    return bias_offset() + 1 + stage * stage_dim();
  }
  [[nodiscard]] std::size_t held_offset(std::size_t stage) const { return stage_offset(stage) + 1; }
  [[nodiscard]] std::size_t entity_offset(std::size_t stage) const {
    return stage_offset(stage) + 1 + max_entities;
  }
  [[nodiscard]] std::size_t state_dim() const { return stage_offset(max_subgoals); }
  [[nodiscard]] std::size_t suggestion_offset() const { return state_dim(); }
  [[nodiscard]] std::size_t dim() const { return state_dim() + suggestion_dim; }
  [[nodiscard]] std::size_t param_count() const { return dim() * kNumActions; }

  // Architecture fingerprint, e.g. "linear-softmax/v2;A=7;E=4;K=6;S=64;D=295".
  [[nodiscard]] std::string fingerprint() const;

  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;
};

struct FeatureVector {
  std::vector<double> values;
};

// theta holds one logit row of length D per action, rows in Action order.
struct PolicyParams {
  std::vector<double> theta;
  std::string version_tag;

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

using ActionProbs = std::array<double, kNumActions>;

FeatureVector featurize(const WorldState& obs, const TaskSpec& task, const Suggestion& suggestion,
                        const FeatureLayout& layout);

PolicyParams zero_params(const FeatureLayout& layout);

// Base policy standing in for a pretrained instruction-following model:
// zero state weights, and suggestion weights that raise the logit of an
// action by `gain` times the feature mass on that action's word bucket
// ("up", "down", "left", "right", "grasp", "release", "toggle").
PolicyParams hint_following_prior(const FeatureLayout& layout, double gain);

// Throws DimensionMismatch when params do not fit the feature vector.
void check_shapes(const PolicyParams& params, const FeatureVector& f);

std::array<double, kNumActions> logits(const PolicyParams& params, const FeatureVector& f);

// softmax(logits / temperature). Throws NonFiniteLogits.
ActionProbs action_distribution(const PolicyParams& params, const FeatureVector& f,
                                double temperature);

double log_prob(const PolicyParams& params, const FeatureVector& f, Action a, double temperature);

// d log p(a) / d theta, same shape as theta:
//   row a' = (1[a'=a] - p(a')) * f / T
std::vector<double> log_prob_gradient(const PolicyParams& params, const FeatureVector& f,
                                      Action a, double temperature);

// grad += scale * d log p(a) / d theta, given precomputed probabilities.
void accumulate_log_prob_gradient(const ActionProbs& probs, const FeatureVector& f, Action a,
                                  double temperature, double scale, std::span<double> grad);

Action sample_action(const ActionProbs& probs, Rng& rng);
Action greedy_action(const ActionProbs& probs);

bool all_finite(std::span<const double> values);

}  // namespace avla
