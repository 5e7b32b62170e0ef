#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avla/config_io.hpp"
#include "avla/task_io.hpp"
#include "avla/trainer.hpp"

namespace avla {

enum class ExperimentMode {
  kFull,
  kAblateArs,
  kAblateLge,
  kAblateEm,
  kAblations,  // full plus all three ablations in one matched run
  kUniformCurriculum,
  kColdVsWarm,
  kTransfer,
  kMemorySensitivity,
};

std::string_view mode_name(ExperimentMode mode);
// Throws ConfigError for unknown names.
ExperimentMode parse_mode(std::string_view name);

// One configuration under comparison.
struct Arm {
  std::string name;
  AdaptConfig config;
  std::size_t bank_capacity = kDefaultCapacity;
};

struct RunRecord {
  std::string arm;
  int seed_index = 0;
  std::uint64_t seed = 0;
  std::string task;
  std::string role;
  std::optional<int> iterations_to_threshold;
  std::optional<int> iterations_to_0_9;
  double pre_success = 0.0;  // evaluation of the starting params
  double final_success = 0.0;
  double final_progress = 0.0;
  std::int64_t rollouts = 0;
  bool warm_started = false;
};

// Medians over target runs; runs that never reach a threshold count as
// budget + 1.
struct ArmSummary {
  std::string arm;
  int runs = 0;
  int reached = 0;
  double median_iterations = 0.0;
  double median_iterations_0_9 = 0.0;
  double median_final_success = 0.0;
  double median_final_progress = 0.0;
  double median_pre_success = 0.0;
  std::int64_t rollouts_per_seed = 0;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentReport {
  ExperimentMode mode = ExperimentMode::kFull;
  std::vector<RunRecord> runs;
  std::vector<ArmSummary> arms;
  std::vector<Check> checks;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] const ArmSummary& arm(std::string_view name) const;
};

struct ExperimentOptions {
  RunConfig config;
  std::optional<std::filesystem::path> out_dir;
  std::function<void(const std::string&)> log;
};

// Arms compared by a mode, derived from the base configuration.
std::vector<Arm> arms_for_mode(ExperimentMode mode, const RunConfig& config);

// Per seed: every arm adapts on the suite's "prime" tasks in order (or, with
// shared_priming, the first arm primes once and the others start from a
// copy of its bank), then on each "target" task. Early stopping is disabled
// so all arms consume identical rollout budgets.
ExperimentReport run_arms(const Suite& suite, const std::vector<Arm>& arms, bool shared_priming,
                          const ExperimentOptions& options);

// Matched-budget comparison for `mode` plus its directional checks.
ExperimentReport run_experiment(const Suite& suite, ExperimentMode mode,
                                const ExperimentOptions& options);

// Directional checks for a finished report.
std::vector<Check> mode_checks(ExperimentMode mode, const ExperimentReport& report);

double median(std::vector<double> values);

}  // namespace avla
