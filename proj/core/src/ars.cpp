#include "avla/ars.hpp"

#include <algorithm>

#include "avla/errors.hpp"

namespace avla {

CapabilityTracker::CapabilityTracker(std::size_t num_subgoals, double alpha, double c_init)
    : c_hat_(num_subgoals, std::clamp(c_init, 0.0, 1.0)), alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
}

void CapabilityTracker::check_index(std::size_t k) const {
  if (k < 1 || k > c_hat_.size()) {
    throw IndexOutOfRange("sub-goal " + std::to_string(k) + " of " +
                          std::to_string(c_hat_.size()));
  }
}

void CapabilityTracker::update(std::size_t k, bool success) {
  check_index(k);
  double& c = c_hat_[k - 1];
  c = std::clamp(alpha_ * c + (1.0 - alpha_) * (success ? 1.0 : 0.0), 0.0, 1.0);
}

double CapabilityTracker::capability(std::size_t k) const {
  check_index(k);
  return c_hat_[k - 1];
}

double CapabilityTracker::weight(std::size_t k) const { return 1.0 - capability(k); }

std::vector<double> CapabilityTracker::weights() const {
  std::vector<double> w(c_hat_.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 - c_hat_[i];
  return w;
}

void update_capability(CapabilityTracker& tracker, std::size_t k, bool success) {
  tracker.update(k, success);
}

double subgoal_weight(const CapabilityTracker& tracker, std::size_t k) { return tracker.weight(k); }

std::vector<Segment> segment_trajectory(const Trajectory& traj,
                                        std::span<const SubGoal> subgoals) {
  const std::size_t last = traj.observations.empty() ? 0 : traj.observations.size() - 1;
  std::vector<Segment> segments;
  segments.reserve(subgoals.size());
  std::size_t boundary = 0;
  for (const auto& g : subgoals) {
    Segment seg{boundary, last, false};
    for (std::size_t t = boundary; t <= last && !traj.observations.empty(); ++t) {
      if (eval_predicate(traj.observations[t], g)) {
        seg.end = t;
        seg.reached = true;
        break;
      }
    }
    if (seg.reached) boundary = seg.end;
    segments.push_back(seg);
  }
  return segments;
}

std::vector<bool> subgoal_successes(const Trajectory& traj, std::span<const SubGoal> subgoals) {
  std::vector<bool> hit(subgoals.size(), false);
  for (const auto& obs : traj.observations) {
    for (std::size_t k = 0; k < subgoals.size(); ++k) {
      if (!hit[k] && eval_predicate(obs, subgoals[k])) hit[k] = true;
    }
  }
  return hit;
}

double OracleCritic::progress(const WorldState& start, const WorldState& end, const SubGoal& g,
                              Rng& /*rng*/) const {
  return oracle_progress(start, end, g);
}

NoisyOracleCritic::NoisyOracleCritic(double sigma) : sigma_(sigma) {
  if (!(sigma >= 0.0)) throw ConfigError("critic sigma must be non-negative");
}

double NoisyOracleCritic::progress(const WorldState& start, const WorldState& end,
                                   const SubGoal& g, Rng& rng) const {
  return noisy_critic(oracle_progress(start, end, g), sigma_, rng);
}

double noisy_critic(double oracle_value, double sigma, Rng& rng) {
  if (sigma == 0.0) return oracle_value;
  return std::clamp(oracle_value + sigma * rng.normal(), 0.0, 1.0);
}

std::unique_ptr<ProgressCritic> make_critic(double sigma) {
  if (sigma == 0.0) return std::make_unique<OracleCritic>();
  return std::make_unique<NoisyOracleCritic>(sigma);
}

RewardBreakdown compute_reward(const Trajectory& traj, std::span<const SubGoal> subgoals,
                               const CapabilityTracker& tracker, const ProgressCritic& critic,
                               Rng& rng, WeightMode mode) {
  if (tracker.size() != subgoals.size()) {
    throw IndexOutOfRange("tracker has " + std::to_string(tracker.size()) + " entries for " +
                          std::to_string(subgoals.size()) + " sub-goals");
  }
  RewardBreakdown out;
  const auto segments = segment_trajectory(traj, subgoals);
  out.deltas.resize(subgoals.size());
  out.weights.resize(subgoals.size());
  for (std::size_t k = 0; k < subgoals.size(); ++k) {
    const auto& seg = segments[k];
    const double delta = critic.progress(traj.observations[seg.start],
                                         traj.observations[seg.end], subgoals[k], rng);
    out.deltas[k] = std::clamp(delta, 0.0, 1.0);
    out.weights[k] = mode == WeightMode::kUniform ? 1.0 : tracker.weight(k + 1);
    out.total += out.weights[k] * out.deltas[k];
  }
  out.subgoal_successes = subgoal_successes(traj, subgoals);
  return out;
}

}  // namespace avla
