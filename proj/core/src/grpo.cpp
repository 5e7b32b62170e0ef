#include "avla/grpo.hpp"

#include <algorithm>
#include <cmath>

#include "avla/errors.hpp"

namespace avla {

void validate_grpo_config(const GrpoConfig& config) {
  if (!(config.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(config.clip_epsilon > 0.0 && config.clip_epsilon < 1.0)) {
    throw ConfigError("clip_epsilon must lie in (0, 1)");
  }
  if (!(config.epsilon_std > 0.0)) throw ConfigError("epsilon_std must be positive");
  if (config.epochs_per_batch < 1) throw ConfigError("epochs_per_batch must be at least 1");
}

std::vector<double> group_advantages(std::span<const double> rewards, double epsilon_std) {
  if (rewards.size() < 2) {
    throw GroupTooSmall("group of " + std::to_string(rewards.size()) + " rollouts");
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double std_pop = std::sqrt(var / n);
  std::vector<double> adv(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    adv[i] = (rewards[i] - mean) / (std_pop + epsilon_std);
  }
  return adv;
}

namespace {

struct Visit {
  double advantage;
  const Trajectory* traj;
};

template <typename PerStep>
std::size_t for_each_step(std::span<const RolloutGroup> groups, double epsilon_std,
                          PerStep&& fn) {
  std::size_t n_traj = 0;
  for (const auto& g : groups) {
    if (g.trajectories.size() != g.rewards.size()) {
      throw DimensionMismatch("group rewards do not match trajectories");
    }
    const auto adv = group_advantages(g.rewards, epsilon_std);
    for (std::size_t i = 0; i < g.trajectories.size(); ++i) {
      ++n_traj;
      fn(Visit{adv[i], &g.trajectories[i]});
    }
  }
  return n_traj;
}

}  // namespace

std::vector<double> surrogate_gradient(const PolicyParams& params,
                                       std::span<const RolloutGroup> groups,
                                       const GrpoConfig& config) {
  std::vector<double> grad(params.theta.size(), 0.0);
  const double lo = 1.0 - config.clip_epsilon;
  const double hi = 1.0 + config.clip_epsilon;
  const std::size_t n_traj = for_each_step(groups, config.epsilon_std, [&](const Visit& v) {
    const Trajectory& tr = *v.traj;
    const std::size_t len = tr.length();
    if (v.advantage == 0.0 || len == 0) return;
    const double per_step = 1.0 / static_cast<double>(len);
    for (std::size_t t = 0; t < len; ++t) {
      const auto& f = tr.features[t];
      const auto probs = action_distribution(params, f, tr.temperature);
      const double logp = std::log(probs[static_cast<std::size_t>(tr.actions[t])]);
      const double ratio = std::exp(logp - tr.log_probs[t]);
      // Clipped branch is active (zero gradient) when the ratio has already
      // moved past the trust region in the direction the advantage favors.
      if ((v.advantage > 0.0 && ratio > hi) || (v.advantage < 0.0 && ratio < lo)) continue;
      accumulate_log_prob_gradient(probs, f, tr.actions[t], tr.temperature,
                                   v.advantage * ratio * per_step, grad);
    }
  });
  if (n_traj > 0) {
    for (double& g : grad) g /= static_cast<double>(n_traj);
  }
  return grad;
}

double surrogate_objective(const PolicyParams& params, std::span<const RolloutGroup> groups,
                           const GrpoConfig& config) {
  const double lo = 1.0 - config.clip_epsilon;
  const double hi = 1.0 + config.clip_epsilon;
  double total = 0.0;
  const std::size_t n_traj = for_each_step(groups, config.epsilon_std, [&](const Visit& v) {
    const Trajectory& tr = *v.traj;
    if (tr.length() == 0) return;
    double acc = 0.0;
    for (std::size_t t = 0; t < tr.length(); ++t) {
      const double logp = log_prob(params, tr.features[t], tr.actions[t], tr.temperature);
      const double ratio = std::exp(logp - tr.log_probs[t]);
      acc += std::min(ratio * v.advantage, std::clamp(ratio, lo, hi) * v.advantage);
    }
    total += acc / static_cast<double>(tr.length());
  });
  return n_traj > 0 ? total / static_cast<double>(n_traj) : 0.0;
}

PolicyParams update(const PolicyParams& params, std::span<const RolloutGroup> groups,
                    const GrpoConfig& config) {
  validate_grpo_config(config);
  PolicyParams next = params;
  for (int epoch = 0; epoch < config.epochs_per_batch; ++epoch) {
    const auto grad = surrogate_gradient(next, groups, config);
    if (!all_finite(grad)) throw NonFiniteGradient("surrogate gradient has non-finite entries");
    for (std::size_t i = 0; i < grad.size(); ++i) {
      if (grad[i] != 0.0) next.theta[i] += config.learning_rate * grad[i];
    }
    if (!all_finite(next.theta)) throw NonFiniteGradient("parameters became non-finite");
  }
  return next;
}

}  // namespace avla
