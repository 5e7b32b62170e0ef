#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avla/ars.hpp"
#include "avla/grpo.hpp"
#include "avla/lge.hpp"
#include "avla/memory.hpp"
#include "avla/policy.hpp"
#include "avla/world.hpp"

namespace avla {

struct AdaptConfig {
  int n_iterations = 150;
  int rollouts_per_iteration = 32;
  int group_size = 8;
  int horizon = 500;  // upper bound; a task's own horizon applies when shorter
  double success_threshold = 0.8;
  bool early_stop = true;
  int eval_every = 1;
  int eval_episodes = 50;
  bool eval_greedy = false;  // true: argmax actions instead of sampling
  std::uint64_t seed = 0;

  bool use_ars = true;          // false: progress on the final predicate only
  bool use_lge = true;
  bool use_memory = true;
  bool uniform_weights = false; // decomposed rewards with w_k = 1
  double critic_sigma = 0.05;

  double alpha = 0.9;
  double c_init = 0.0;
  double explore_temperature = 1.2;
  double eval_temperature = 1.0;
  GrpoConfig grpo{};
  SuggestionSchedule schedule{};
  std::size_t retrieval_k = 3;
  double retrieval_tau = 0.1;
  double memory_insert_threshold = 0.5;
  FeatureLayout features{};
  double prior_gain = 4.0;
};

// Throws ConfigError on the first violated invariant.
void validate_config(const AdaptConfig& config);

struct IterationRecord {
  int iteration = 0;
  std::int64_t rollout_count = 0;
  double mean_reward = 0.0;
  std::optional<double> eval_success_rate;
  std::optional<double> eval_progress;
  std::vector<double> capabilities;
  std::vector<double> weights;
  double suggestion_probability = 0.0;
  double suggestion_coverage = 0.0;  // fraction of rollout steps with an active hint
  bool update_skipped = false;
};

struct EvalResult {
  double success_rate = 0.0;
  double mean_progress = 0.0;
};

struct AdaptReport {
  std::vector<IterationRecord> iterations;
  PolicyParams initial_params;
  PolicyParams final_params;
  EvalResult initial_eval;
  EvalResult final_eval;
  // First evaluated iteration (0 = before any update) reaching the
  // configured threshold, and 0.9.
  std::optional<int> iterations_to_threshold;
  std::optional<int> iterations_to_0_9;
  std::int64_t rollout_count = 0;
  bool warm_started = false;
  bool inserted_into_bank = false;
};

// Instrumentation. Events, in per-iteration order: "rollouts", "rewards",
// "advantages", "grpo_update", "capability_update", "schedule_update" and
// "evaluate"; plus "warm_start", "decompose", "tracker_init" before the
// loop and "memory_insert" after it.
struct AdaptHooks {
  std::function<void(std::string_view event, int iteration)> on_event;
  std::function<void(const IterationRecord&)> on_iteration;
};

using Controller = std::function<Action(const WorldState&)>;

// Episodes without suggestions. success = final predicate reached within
// the horizon; progress = completed sub-goals / K at episode end.
EvalResult evaluate_controller(const std::function<Action(const WorldState&, Rng&)>& controller,
                               const TaskSpec& task, int n_episodes, int horizon_cap = 1 << 30);

struct EvalOptions {
  double temperature = 1.0;
  bool greedy = false;
  int horizon_cap = 1 << 30;
  FeatureLayout features{};
};

EvalResult evaluate(const PolicyParams& params, const TaskSpec& task, int n_episodes,
                    std::uint64_t seed, const EvalOptions& options = {});

// Rollout with optional suggestion gating; exposed for tests and
// benchmarks.
Trajectory rollout(const PolicyParams& params, const TaskSpec& task, const AdaptConfig& config,
                   const SuggestionSchedule& schedule, SuggestionProvider* provider,
                   const CapabilityTracker& tracker, Rng& rng);

struct AdaptResult {
  PolicyParams params;
  AdaptReport report;
};

// One online adaptation run: warm start, decompose, rollout / reward /
// GRPO / capability / schedule iterations with periodic evaluation, then
// memory insertion when the final success rate clears
// memory_insert_threshold.
AdaptResult adapt(const TaskSpec& task, const PolicyParams& base_params, MemoryBank& bank,
                  const AdaptConfig& config, const AdaptHooks& hooks = {},
                  SuggestionProvider* provider = nullptr);

// Base parameters every run starts from when the bank has nothing better.
PolicyParams base_policy(const AdaptConfig& config);

}  // namespace avla
