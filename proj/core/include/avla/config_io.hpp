#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "avla/trainer.hpp"

namespace avla {

// Experiment-level settings that sit outside a single adaptation run.
struct ExperimentSettings {
  int seeds = 10;
  std::uint64_t base_seed = 1;
  int prime_iterations = 40;
  int target_iterations = 60;
  std::size_t bank_capacity = kDefaultCapacity;
  std::vector<double> sweep_tau{0.05, 1.0, 10.0};
  std::vector<std::size_t> sweep_k{1, 10};
  std::vector<std::size_t> sweep_capacity{1};
};

struct RunConfig {
  AdaptConfig adapt;
  ExperimentSettings experiment;
};

// Defaults tuned for the desk-scale simulator (larger learning rate and a
// shorter suggestion interval than the large-model settings).
RunConfig desk_defaults();

// JSON config; every key is optional and unknown keys throw ConfigError.
// Layout (see docs/formats.md):
//   { "n_iterations", "rollouts_per_iteration", "group_size", "horizon",
//     "success_threshold", "early_stop", "eval_every", "eval_episodes",
//     "eval_greedy", "seed", "use_ars", "use_lge", "use_memory",
//     "uniform_weights", "critic_sigma",
//     "ars": { "alpha", "c_init" },
//     "policy": { "explore_temperature", "eval_temperature", "prior_gain",
//                 "max_entities", "max_subgoals", "suggestion_dim" },
//     "grpo": { "learning_rate", "clip_epsilon", "epsilon_std", "epochs_per_batch" },
//     "lge": { "p_max", "lambda", "beta", "interval" },
//     "memory": { "k", "tau", "insert_threshold", "capacity" },
//     "experiment": { "seeds", "base_seed", "prime_iterations", "target_iterations",
//                     "sweep_tau", "sweep_k", "sweep_capacity" } }
RunConfig parse_config(std::string_view json_text, const RunConfig& defaults = desk_defaults());
RunConfig load_config(const std::filesystem::path& path, const RunConfig& defaults = desk_defaults());
std::string dump_config(const RunConfig& config);

}  // namespace avla
