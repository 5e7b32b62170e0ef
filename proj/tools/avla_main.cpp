// avla: train, evaluate, run experiments and inspect memory banks.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "avla/config_io.hpp"
#include "avla/errors.hpp"
#include "avla/experiment.hpp"
#include "avla/memory.hpp"
#include "avla/metrics.hpp"
#include "avla/params_io.hpp"
#include "avla/task_io.hpp"
#include "avla/trainer.hpp"

namespace fs = std::filesystem;
using namespace avla;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitCheckFailed = 3;

TaskSpec resolve_task(const std::string& id, const std::string& suite_path) {
  if (!suite_path.empty()) {
    const auto suite = load_suite(suite_path, TemplateSet::builtin());
    return find_task(suite.tasks(), id);
  }
  const auto lib = builtin_library();
  return find_task(lib, id);
}

RunConfig config_from(const std::string& path) {
  return path.empty() ? desk_defaults() : load_config(path);
}

int cmd_train(const std::string& task_id, const std::string& suite, const std::string& config_path,
              const std::string& bank_path, std::optional<std::uint64_t> seed,
              const std::string& out_dir) {
  RunConfig cfg = config_from(config_path);
  if (seed) cfg.adapt.seed = *seed;
  const TaskSpec task = resolve_task(task_id, suite);
  const std::string tag = cfg.adapt.features.fingerprint();
  MemoryBank bank(tag, cfg.experiment.bank_capacity);
  if (!bank_path.empty() && fs::exists(bank_path)) {
    bank = load_bank(bank_path, tag, cfg.experiment.bank_capacity);
  }
  fs::create_directories(out_dir);
  std::ofstream metrics(fs::path(out_dir) / "metrics.csv", std::ios::trunc);
  if (!metrics) throw Error("cannot write metrics to " + out_dir);
  IterationCsvWriter writer(metrics);
  AdaptHooks hooks;
  hooks.on_iteration = [&](const IterationRecord& r) { writer.write(r); };
  const auto result = adapt(task, base_policy(cfg.adapt), bank, cfg.adapt, hooks);
  save_params(result.params, fs::path(out_dir) / "params.avpp");
  if (!bank_path.empty()) save_bank(bank, bank_path);
  const auto& rep = result.report;
  std::cout << "task " << task.name << "\n"
            << "iterations " << rep.iterations.size() << "\n"
            << "rollouts " << rep.rollout_count << "\n"
            << "final_success_rate " << format_number(rep.final_eval.success_rate) << "\n"
            << "final_progress " << format_number(rep.final_eval.mean_progress) << "\n"
            << "iterations_to_threshold "
            << (rep.iterations_to_threshold ? std::to_string(*rep.iterations_to_threshold) : "none")
            << "\n"
            << "warm_started " << (rep.warm_started ? "yes" : "no") << "\n"
            << "inserted_into_bank " << (rep.inserted_into_bank ? "yes" : "no") << "\n";
  return 0;
}

int cmd_eval(const std::string& params_path, const std::string& task_id, const std::string& suite,
             const std::string& config_path, int episodes, std::uint64_t seed, bool greedy) {
  const RunConfig cfg = config_from(config_path);
  const TaskSpec task = resolve_task(task_id, suite);
  const auto params = load_params(params_path, cfg.adapt.features.fingerprint());
  EvalOptions opts{cfg.adapt.eval_temperature, greedy || cfg.adapt.eval_greedy, cfg.adapt.horizon,
                   cfg.adapt.features};
  const auto r = evaluate(params, task, episodes, seed, opts);
  std::cout << "success_rate " << format_number(r.success_rate) << "\n"
            << "mean_progress " << format_number(r.mean_progress) << "\n";
  return 0;
}

int cmd_experiment(const std::string& mode_text, const std::string& suite_path,
                   std::optional<int> seeds, const std::string& out_dir,
                   const std::string& config_path, bool quiet) {
  const ExperimentMode mode = parse_mode(mode_text);
  ExperimentOptions opts;
  opts.config = config_from(config_path);
  if (seeds) opts.config.experiment.seeds = *seeds;
  if (opts.config.experiment.seeds < 1) throw ConfigError("--seeds must be positive");
  opts.out_dir = out_dir;
  if (!quiet) opts.log = [](const std::string& line) { std::cerr << line << "\n"; };
  const auto suite = load_suite(suite_path, TemplateSet::builtin());
  const auto report = run_experiment(suite, mode, opts);
  for (const auto& a : report.arms) {
    std::cout << a.arm << ": median_iterations_to_0.8 " << format_number(a.median_iterations)
              << " reached " << a.reached << "/" << a.runs << " median_final_success "
              << format_number(a.median_final_success) << "\n";
  }
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
  }
  return report.passed() ? 0 : kExitCheckFailed;
}

int cmd_bank(const std::string& action, const std::string& path) {
  const MemoryBank bank = load_bank(path);
  if (action == "export") {
    std::cout << export_bank_text(bank) << "\n";
    return 0;
  }
  std::cout << "fingerprint " << bank.version_tag() << "\n"
            << "embedding_dim " << bank.embedding_dim() << "\n"
            << "entries " << bank.size() << "\n";
  for (const auto& e : bank.entries()) {
    std::cout << "- \"" << e.meta.instruction << "\" success_rate "
              << format_number(e.meta.success_rate) << " iterations "
              << e.meta.training_iterations << " subgoals " << e.meta.task_complexity
              << " created_at " << e.meta.created_at << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online adaptation with adaptive rewards, guided exploration and experience memory"};
  app.require_subcommand(1);

  std::string task_id, suite, config_path, bank_path, out_dir = ".", params_path, mode, bank_action;
  std::optional<std::uint64_t> seed;
  std::optional<int> seeds;
  int episodes = 50;
  std::uint64_t eval_seed = 0;
  bool greedy = false, quiet = false;

  auto* train = app.add_subcommand("train", "adapt a policy on one task");
  train->add_option("--task", task_id, "task id")->required();
  train->add_option("--config", config_path, "JSON config file");
  train->add_option("--bank", bank_path, "memory bank file, created if missing");
  train->add_option("--seed", seed, "run seed");
  train->add_option("--suite", suite, "suite file to look the task up in");
  train->add_option("--out", out_dir, "directory for params.avpp and metrics.csv");

  auto* eval = app.add_subcommand("eval", "evaluate saved parameters");
  eval->add_option("--params", params_path, "parameter file")->required();
  eval->add_option("--task", task_id, "task id")->required();
  eval->add_option("--episodes", episodes, "evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_option("--suite", suite, "suite file to look the task up in");
  eval->add_option("--config", config_path, "JSON config file");
  eval->add_option("--seed", eval_seed, "evaluation seed");
  eval->add_flag("--greedy", greedy, "argmax actions instead of sampling");

  auto* exp = app.add_subcommand("experiment", "run a matched-budget comparison");
  exp->add_option("--mode", mode, "experiment mode")->required();
  exp->add_option("--suite", suite, "suite file")->required();
  exp->add_option("--seeds", seeds, "number of seeds");
  exp->add_option("--out", out_dir, "output directory")->required();
  exp->add_option("--config", config_path, "JSON config file");
  exp->add_flag("--quiet", quiet, "no per-run progress on stderr");

  auto* bank = app.add_subcommand("bank", "inspect or export a memory bank");
  bank->add_option("action", bank_action, "inspect | export")
      ->required()
      ->check(CLI::IsMember({"inspect", "export"}));
  bank->add_option("path", bank_path, "bank file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train) return cmd_train(task_id, suite, config_path, bank_path, seed, out_dir);
    if (*eval) return cmd_eval(params_path, task_id, suite, config_path, episodes, eval_seed, greedy);
    if (*exp) return cmd_experiment(mode, suite, seeds, out_dir, config_path, quiet);
    if (*bank) return cmd_bank(bank_action, bank_path);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
