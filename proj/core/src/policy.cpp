#include "avla/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "avla/errors.hpp"
#include "avla/text_embedding.hpp"

namespace avla {

std::string FeatureLayout::fingerprint() const {
  return "linear-softmax/v2;A=" + std::to_string(kNumActions) +
         ";E=" + std::to_string(max_entities) + ";K=" + std::to_string(max_subgoals) +
         ";S=" + std::to_string(suggestion_dim) + ";D=" + std::to_string(dim());
}

FeatureVector featurize(const WorldState& obs, const TaskSpec& task, const Suggestion& suggestion,
                        const FeatureLayout& layout) {
  if (obs.entities.size() > layout.max_entities) {
    throw DimensionMismatch("task has " + std::to_string(obs.entities.size()) +
                            " entities, layout allows " + std::to_string(layout.max_entities));
  }
  if (task.subgoals.size() > layout.max_subgoals) {
    throw DimensionMismatch("task has " + std::to_string(task.subgoals.size()) +
                            " sub-goals, layout allows " + std::to_string(layout.max_subgoals));
  }
  if (suggestion.features.size() != layout.suggestion_dim) {
    throw DimensionMismatch("suggestion features have wrong dimension");
  }
  FeatureVector f;
  f.values.assign(layout.dim(), 0.0);
  auto& v = f.values;
  v[0] = obs.width > 1 ? static_cast<double>(obs.gripper.x) / (obs.width - 1) : 0.0;
  v[1] = obs.height > 1 ? static_cast<double>(obs.gripper.y) / (obs.height - 1) : 0.0;
  const auto done = completion_flags(obs, task);
  for (std::size_t k = 0; k < done.size(); ++k) {
    v[layout.subgoal_offset() + k] = done[k] ? 1.0 : 0.0;
  }
  v[layout.bias_offset()] = 1.0;

  const auto first_open = std::find(done.begin(), done.end(), false);
  const std::size_t stage =
      first_open == done.end() ? done.size() - 1 : static_cast<std::size_t>(first_open - done.begin());
  v[layout.stage_offset(stage)] = 1.0;
  if (obs.held) v[layout.held_offset(stage) + *obs.held] = 1.0;
  const double diam = obs.diameter() > 0 ? obs.diameter() : 1.0;
  for (std::size_t i = 0; i < obs.entities.size(); ++i) {
    const Entity& e = obs.entities[i];
    const int dx = e.pos.x - obs.gripper.x;
    const int dy = e.pos.y - obs.gripper.y;
    double* block = &v[layout.entity_offset(stage) + FeatureLayout::kPerEntity * i];
    block[0] = dx / diam;
    block[1] = dy / diam;
    block[2] = dx > 0 ? 1.0 : 0.0;
    block[3] = dx < 0 ? 1.0 : 0.0;
    block[4] = dy > 0 ? 1.0 : 0.0;
    block[5] = dy < 0 ? 1.0 : 0.0;
    block[6] = (dx == 0 && dy == 0) ? 1.0 : 0.0;
    block[7] = e.toggled ? 1.0 : 0.0;
  }
  if (suggestion.active()) {
    std::copy(suggestion.features.begin(), suggestion.features.end(),
              v.begin() + static_cast<std::ptrdiff_t>(layout.suggestion_offset()));
  }
  return f;
}

PolicyParams zero_params(const FeatureLayout& layout) {
  return {std::vector<double>(layout.param_count(), 0.0), layout.fingerprint()};
}

PolicyParams hint_following_prior(const FeatureLayout& layout, double gain) {
  PolicyParams p = zero_params(layout);
  const std::size_t d = layout.dim();
  for (std::size_t a = 0; a < kNumActions; ++a) {
    const auto bucket = token_bucket(action_name(kAllActions[a]), layout.suggestion_dim);
    p.theta[a * d + layout.suggestion_offset() + bucket] += gain;
  }
  return p;
}

void check_shapes(const PolicyParams& params, const FeatureVector& f) {
  if (params.theta.size() != f.values.size() * kNumActions) {
    throw DimensionMismatch("parameter length " + std::to_string(params.theta.size()) +
                            " does not match feature dimension " +
                            std::to_string(f.values.size()));
  }
}

std::array<double, kNumActions> logits(const PolicyParams& params, const FeatureVector& f) {
  check_shapes(params, f);
  const std::size_t d = f.values.size();
  // Features are mostly zero (one active stage block); dot over the support.
  thread_local std::vector<std::size_t> support;
  support.clear();
  for (std::size_t i = 0; i < d; ++i) {
    if (f.values[i] != 0.0) support.push_back(i);
  }
  std::array<double, kNumActions> out{};
  for (std::size_t a = 0; a < kNumActions; ++a) {
    const double* row = params.theta.data() + a * d;
    double acc = 0.0;
    for (std::size_t i : support) acc += row[i] * f.values[i];
    out[a] = acc;
  }
  return out;
}

ActionProbs action_distribution(const PolicyParams& params, const FeatureVector& f,
                                double temperature) {
  if (!(temperature > 0.0)) throw NonFiniteLogits("temperature must be positive");
  const auto z = logits(params, f);
  ActionProbs p{};
  double max_z = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < kNumActions; ++a) {
    p[a] = z[a] / temperature;
    if (!std::isfinite(p[a])) throw NonFiniteLogits("logit for action " + std::to_string(a));
    max_z = std::max(max_z, p[a]);
  }
  double total = 0.0;
  for (double& x : p) {
    x = std::exp(x - max_z);
    total += x;
  }
  for (double& x : p) x /= total;
  return p;
}

double log_prob(const PolicyParams& params, const FeatureVector& f, Action a, double temperature) {
  const auto z = logits(params, f);
  double max_z = -std::numeric_limits<double>::infinity();
  for (double x : z) max_z = std::max(max_z, x / temperature);
  double total = 0.0;
  for (double x : z) total += std::exp(x / temperature - max_z);
  return z[static_cast<std::size_t>(a)] / temperature - max_z - std::log(total);
}

std::vector<double> log_prob_gradient(const PolicyParams& params, const FeatureVector& f,
                                      Action a, double temperature) {
  const auto probs = action_distribution(params, f, temperature);
  std::vector<double> grad(params.theta.size(), 0.0);
  accumulate_log_prob_gradient(probs, f, a, temperature, 1.0, grad);
  return grad;
}

void accumulate_log_prob_gradient(const ActionProbs& probs, const FeatureVector& f, Action a,
                                  double temperature, double scale, std::span<double> grad) {
  const std::size_t d = f.values.size();
  thread_local std::vector<std::size_t> support;
  support.clear();
  for (std::size_t i = 0; i < d; ++i) {
    if (f.values[i] != 0.0) support.push_back(i);
  }
  for (std::size_t row = 0; row < kNumActions; ++row) {
    const double indicator = row == static_cast<std::size_t>(a) ? 1.0 : 0.0;
    const double coef = scale * (indicator - probs[row]) / temperature;
    if (coef == 0.0) continue;
    double* g = grad.data() + row * d;
    for (std::size_t i : support) g[i] += coef * f.values[i];
  }
}

Action sample_action(const ActionProbs& probs, Rng& rng) {
  return kAllActions[rng.categorical(probs)];
}

Action greedy_action(const ActionProbs& probs) {
  const auto it = std::max_element(probs.begin(), probs.end());
  return kAllActions[static_cast<std::size_t>(it - probs.begin())];
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace avla
