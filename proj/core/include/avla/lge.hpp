#pragma once

#include <cstdint>
#include <string>

#include "avla/ars.hpp"
#include "avla/rng.hpp"
#include "avla/suggestion.hpp"
#include "avla/world.hpp"

namespace avla {

class SuggestionProvider {
 public:
  virtual ~SuggestionProvider() = default;
  virtual Suggestion suggest(const WorldState& obs, const TaskSpec& task,
                             const CapabilityTracker& tracker, Rng& rng) = 0;
};

// Rulebook over ground truth, applied to the first incomplete sub-goal k*:
//   1. nothing left                  -> no suggestion
//   2. holding the wrong object      -> ordering hint if it was picked up
//                                       early, else "release <held>"
//   3. co-located with what k* needs -> "grasp|toggle|release <entity>"
//   4. carrying an object early      -> "complete <g_k*> before <g_j>"
//   5. otherwise                     -> "move <dir> toward <entity>"
// Ties resolve to the lowest sub-goal index; directions prefer the axis
// with the larger gap, horizontal on ties.
std::string heuristic_hint(const WorldState& obs, const TaskSpec& task);

class HeuristicProvider final : public SuggestionProvider {
 public:
  explicit HeuristicProvider(std::size_t dim) : dim_(dim) {}
  Suggestion suggest(const WorldState& obs, const TaskSpec& task,
                     const CapabilityTracker& tracker, Rng& rng) override;

 private:
  std::size_t dim_;
};

struct SuggestionSchedule {
  double p_max = 0.8;
  double lambda = 0.5;
  double r_bar = 0.0;
  double beta = 0.9;
  std::int64_t interval = 50;
};

// Throws ConfigError when the schedule invariants do not hold.
void validate_schedule(const SuggestionSchedule& sched);

// p_max * exp(-lambda * r_bar)
double suggestion_probability(const SuggestionSchedule& sched);

// r_bar <- beta * r_bar + (1 - beta) * (batch_mean_reward / num_subgoals)
void update_reward_average(SuggestionSchedule& sched, double batch_mean_reward,
                           std::size_t num_subgoals);

// True iff t is a suggestion opportunity (multiple of interval) and the
// Bernoulli draw succeeds. Off-interval steps consume no randomness.
bool should_suggest(const SuggestionSchedule& sched, std::int64_t t, Rng& rng);

}  // namespace avla
