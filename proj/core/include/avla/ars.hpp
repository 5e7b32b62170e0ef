#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "avla/rng.hpp"
#include "avla/trajectory.hpp"
#include "avla/world.hpp"

namespace avla {

// Per-sub-goal proficiency estimates c_k, updated as an exponential moving
// average of success indicators. Sub-goal indices are 1-based.
class CapabilityTracker {
 public:
  CapabilityTracker(std::size_t num_subgoals, double alpha, double c_init = 0.0);

  // c_k <- alpha * c_k + (1 - alpha) * 1[success]
  void update(std::size_t k, bool success);

  [[nodiscard]] double capability(std::size_t k) const;
  // w_k = 1 - c_k
  [[nodiscard]] double weight(std::size_t k) const;

  [[nodiscard]] std::size_t size() const { return c_hat_.size(); }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] const std::vector<double>& estimates() const { return c_hat_; }
  [[nodiscard]] std::vector<double> weights() const;

 private:
  void check_index(std::size_t k) const;

  std::vector<double> c_hat_;
  double alpha_;
};

// Free-function forms of the tracker operations.
void update_capability(CapabilityTracker& tracker, std::size_t k, bool success);
double subgoal_weight(const CapabilityTracker& tracker, std::size_t k);

// Observation-index interval attributed to one sub-goal.
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;
  bool reached = false;

  friend bool operator==(const Segment&, const Segment&) = default;
};

// Segment k runs from the previous boundary (0 for k = 1) to the first
// observation at or after it where g_k holds. Unreached sub-goals get
// (previous boundary, T) and leave the boundary unchanged.
std::vector<Segment> segment_trajectory(const Trajectory& traj, std::span<const SubGoal> subgoals);

// Whether each sub-goal's predicate held at any observation.
std::vector<bool> subgoal_successes(const Trajectory& traj, std::span<const SubGoal> subgoals);

// Scores progress on a sub-goal between two observations. The oracle and
// its noisy variant ship; a learned critic can implement this interface.
class ProgressCritic {
 public:
  virtual ~ProgressCritic() = default;
  virtual double progress(const WorldState& start, const WorldState& end, const SubGoal& g,
                          Rng& rng) const = 0;
};

class OracleCritic final : public ProgressCritic {
 public:
  double progress(const WorldState& start, const WorldState& end, const SubGoal& g,
                  Rng& rng) const override;
};

class NoisyOracleCritic final : public ProgressCritic {
 public:
  explicit NoisyOracleCritic(double sigma);
  double progress(const WorldState& start, const WorldState& end, const SubGoal& g,
                  Rng& rng) const override;
  [[nodiscard]] double sigma() const { return sigma_; }

 private:
  double sigma_;
};

// clamp(value + N(0, sigma^2), 0, 1). sigma == 0 returns value unchanged
// and draws nothing.
double noisy_critic(double oracle_value, double sigma, Rng& rng);

std::unique_ptr<ProgressCritic> make_critic(double sigma);

struct RewardBreakdown {
  std::vector<double> deltas;
  std::vector<double> weights;
  double total = 0.0;
  std::vector<bool> subgoal_successes;
};

enum class WeightMode { kAdaptive, kUniform };

// R = sum_k w_k * Delta_k with Delta_k scored on segment k. kUniform uses
// w_k = 1 regardless of the tracker.
RewardBreakdown compute_reward(const Trajectory& traj, std::span<const SubGoal> subgoals,
                               const CapabilityTracker& tracker, const ProgressCritic& critic,
                               Rng& rng, WeightMode mode = WeightMode::kAdaptive);

}  // namespace avla
