#pragma once

#include <span>
#include <vector>

#include "avla/policy.hpp"
#include "avla/trajectory.hpp"

namespace avla {

struct GrpoConfig {
  double learning_rate = 1e-5;
  double clip_epsilon = 0.2;
  double epsilon_std = 1e-8;
  int epochs_per_batch = 1;
};

void validate_grpo_config(const GrpoConfig& config);

// G >= 2 trajectories from one task and one parameter snapshot, with their
// scalar rewards.
struct RolloutGroup {
  std::vector<Trajectory> trajectories;
  std::vector<double> rewards;
};

// (R_i - mean) / (population std + epsilon_std). Throws GroupTooSmall.
std::vector<double> group_advantages(std::span<const double> rewards, double epsilon_std);

// Gradient of the clipped surrogate
//   J = mean_i mean_t min(rho A_i, clip(rho, 1-eps, 1+eps) A_i)
// at `params`, with rho = exp(log pi(a_t|f_t) - log pi_old(a_t|f_t)).
// Trajectories with zero advantage contribute nothing.
std::vector<double> surrogate_gradient(const PolicyParams& params,
                                       std::span<const RolloutGroup> groups,
                                       const GrpoConfig& config);

// Value of the surrogate objective at `params`.
double surrogate_objective(const PolicyParams& params, std::span<const RolloutGroup> groups,
                           const GrpoConfig& config);

// epochs_per_batch ascent steps of size learning_rate on the surrogate.
// Throws NonFiniteGradient, leaving the caller's params untouched.
PolicyParams update(const PolicyParams& params, std::span<const RolloutGroup> groups,
                    const GrpoConfig& config);

}  // namespace avla
