#include "avla/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "avla/errors.hpp"
#include "avla/metrics.hpp"

namespace avla {

namespace {

struct ModeName {
  ExperimentMode mode;
  std::string_view name;
};

constexpr ModeName kModes[] = {
    {ExperimentMode::kFull, "full"},
    {ExperimentMode::kAblateArs, "ablate-ars"},
    {ExperimentMode::kAblateLge, "ablate-lge"},
    {ExperimentMode::kAblateEm, "ablate-em"},
    {ExperimentMode::kAblations, "ablations"},
    {ExperimentMode::kUniformCurriculum, "uniform-curriculum"},
    {ExperimentMode::kColdVsWarm, "cold-vs-warm"},
    {ExperimentMode::kTransfer, "transfer"},
    {ExperimentMode::kMemorySensitivity, "memory-sensitivity"},
};

std::uint64_t name_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fmt_short(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

MemoryBank with_capacity(const MemoryBank& bank, std::size_t capacity) {
  if (capacity == bank.capacity()) return bank;
  MemoryBank out(bank.version_tag(), capacity, bank.embedding_dim());
  for (const auto& e : bank.entries()) out.insert(e);
  return out;
}

Arm variant(const std::string& name, AdaptConfig config, std::size_t capacity) {
  return Arm{name, std::move(config), capacity};
}

// Streams the experiment's CSV outputs.
class Outputs {
 public:
  explicit Outputs(const std::optional<std::filesystem::path>& dir) {
    if (!dir) return;
    std::filesystem::create_directories(*dir);
    dir_ = *dir;
    iterations_.open(*dir / "iterations.csv", std::ios::trunc);
    if (!iterations_) throw Error("cannot write " + (*dir / "iterations.csv").string());
    writer_.emplace(iterations_, "arm,seed,task,role");
  }
  void iteration(const IterationRecord& rec, const std::string& prefix) {
    if (writer_) writer_->write(rec, prefix);
  }
  [[nodiscard]] const std::optional<std::filesystem::path>& dir() const { return dir_; }

 private:
  std::optional<std::filesystem::path> dir_;
  std::ofstream iterations_;
  std::optional<IterationCsvWriter> writer_;
};

void write_tables(const std::filesystem::path& dir, const ExperimentReport& report) {
  {
    std::ofstream out(dir / "runs.csv", std::ios::trunc);
    out << "arm,seed_index,seed,task,role,iterations_to_0.8,iterations_to_0.9,pre_success,"
           "final_success,final_progress,rollouts,warm_started\n";
    for (const auto& r : report.runs) {
      out << r.arm << ',' << r.seed_index << ',' << r.seed << ',' << r.task << ',' << r.role << ','
          << (r.iterations_to_threshold ? std::to_string(*r.iterations_to_threshold) : "") << ','
          << (r.iterations_to_0_9 ? std::to_string(*r.iterations_to_0_9) : "") << ','
          << format_number(r.pre_success) << ',' << format_number(r.final_success) << ','
          << format_number(r.final_progress) << ',' << r.rollouts << ','
          << (r.warm_started ? 1 : 0) << '\n';
    }
  }
  {
    std::ofstream out(dir / "summary.csv", std::ios::trunc);
    out << "mode,arm,runs,reached,median_iterations_to_0.8,median_iterations_to_0.9,"
           "median_final_success,median_final_progress,median_pre_success,rollouts_per_seed\n";
    for (const auto& a : report.arms) {
      out << mode_name(report.mode) << ',' << a.arm << ',' << a.runs << ',' << a.reached << ','
          << format_number(a.median_iterations) << ',' << format_number(a.median_iterations_0_9)
          << ',' << format_number(a.median_final_success) << ','
          << format_number(a.median_final_progress) << ',' << format_number(a.median_pre_success)
          << ',' << a.rollouts_per_seed << '\n';
    }
  }
  {
    std::ofstream out(dir / "checks.csv", std::ios::trunc);
    out << "check,passed,detail\n";
    for (const auto& c : report.checks) {
      out << c.name << ',' << (c.passed ? 1 : 0) << ",\"" << c.detail << "\"\n";
    }
  }
}

Check slower_check(const ExperimentReport& r, const std::string& base, const std::string& other,
                   double factor) {
  const double b = r.arm(base).median_iterations;
  const double o = r.arm(other).median_iterations;
  Check c;
  c.name = base + " faster than " + other;
  c.passed = o > b && o >= factor * b;
  c.detail = base + "=" + fmt_short(b) + " " + other + "=" + fmt_short(o) +
             " required " + other + " >= " + fmt_short(factor) + " x " + base;
  return c;
}

Check at_most_check(const ExperimentReport& r, const std::string& base, const std::string& other) {
  const double b = r.arm(base).median_iterations;
  const double o = r.arm(other).median_iterations;
  return {base + " <= " + other, b <= o, base + "=" + fmt_short(b) + " " + other + "=" + fmt_short(o)};
}

}  // namespace

std::string_view mode_name(ExperimentMode mode) {
  for (const auto& m : kModes) {
    if (m.mode == mode) return m.name;
  }
  return "unknown";
}

ExperimentMode parse_mode(std::string_view name) {
  for (const auto& m : kModes) {
    if (m.name == name) return m.mode;
  }
  throw ConfigError("unknown experiment mode '" + std::string(name) + "'");
}

bool ExperimentReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const ArmSummary& ExperimentReport::arm(std::string_view name) const {
  for (const auto& a : arms) {
    if (a.arm == name) return a;
  }
  throw ConfigError("no arm named '" + std::string(name) + "'");
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<Arm> arms_for_mode(ExperimentMode mode, const RunConfig& config) {
  const AdaptConfig& base = config.adapt;
  const std::size_t cap = config.experiment.bank_capacity;
  auto with = [&](auto&& edit) {
    AdaptConfig c = base;
    edit(c);
    return c;
  };
  const auto no_ars = with([](AdaptConfig& c) { c.uniform_weights = true; });
  const auto no_lge = with([](AdaptConfig& c) { c.use_lge = false; });
  const auto no_em = with([](AdaptConfig& c) { c.use_memory = false; });
  switch (mode) {
    case ExperimentMode::kFull:
      return {variant("full", base, cap)};
    case ExperimentMode::kAblateArs:
      return {variant("full", base, cap), variant("no-ars", no_ars, cap)};
    case ExperimentMode::kAblateLge:
      return {variant("full", base, cap), variant("no-lge", no_lge, cap)};
    case ExperimentMode::kAblateEm:
      return {variant("full", base, cap), variant("no-em", no_em, cap)};
    case ExperimentMode::kAblations:
      return {variant("full", base, cap), variant("no-ars", no_ars, cap),
              variant("no-lge", no_lge, cap), variant("no-em", no_em, cap)};
    case ExperimentMode::kUniformCurriculum:
      return {variant("ars", base, cap), variant("uniform", no_ars, cap),
              variant("progress-only", with([](AdaptConfig& c) { c.use_ars = false; }), cap)};
    case ExperimentMode::kColdVsWarm:
      return {variant("warm", base, cap), variant("cold", no_em, cap)};
    case ExperimentMode::kTransfer:
      return {variant("transfer", base, cap)};
    case ExperimentMode::kMemorySensitivity: {
      std::vector<Arm> arms{variant("default", base, cap)};
      for (double tau : config.experiment.sweep_tau) {
        arms.push_back(variant("tau=" + fmt_short(tau),
                               with([&](AdaptConfig& c) { c.retrieval_tau = tau; }), cap));
      }
      for (std::size_t k : config.experiment.sweep_k) {
        arms.push_back(variant("k=" + std::to_string(k),
                               with([&](AdaptConfig& c) { c.retrieval_k = k; }), cap));
      }
      for (std::size_t capacity : config.experiment.sweep_capacity) {
        arms.push_back(variant("capacity=" + std::to_string(capacity), base, capacity));
      }
      return arms;
    }
  }
  throw ConfigError("unhandled experiment mode");
}

ExperimentReport run_arms(const Suite& suite, const std::vector<Arm>& arms, bool shared_priming,
                          const ExperimentOptions& options) {
  if (arms.empty()) throw ConfigError("no arms to run");
  const ExperimentSettings& exp = options.config.experiment;
  const auto primes = suite.with_role("prime");
  const auto targets = suite.with_role("target");
  if (targets.empty()) throw ConfigError("suite '" + suite.name + "' has no target tasks");

  ExperimentReport report;
  Outputs outputs(options.out_dir);
  std::map<std::string, std::int64_t> rollouts_by_arm;

  auto run_one = [&](const Arm& arm, const TaskSpec& task, const std::string& role, int seed_index,
                     std::uint64_t seed_value, int budget, MemoryBank& bank) {
    AdaptConfig cfg = arm.config;
    cfg.n_iterations = budget;
    cfg.early_stop = false;
    cfg.seed = Rng::mix(seed_value ^ name_hash(task.name));
    const std::string prefix =
        arm.name + ',' + std::to_string(seed_index) + ',' + task.name + ',' + role;
    AdaptHooks hooks;
    hooks.on_iteration = [&](const IterationRecord& rec) { outputs.iteration(rec, prefix); };
    const auto result = adapt(task, base_policy(cfg), bank, cfg, hooks);
    const auto& rep = result.report;
    RunRecord r;
    r.arm = arm.name;
    r.seed_index = seed_index;
    r.seed = cfg.seed;
    r.task = task.name;
    r.role = role;
    r.iterations_to_threshold = rep.iterations_to_threshold;
    r.iterations_to_0_9 = rep.iterations_to_0_9;
    r.pre_success = rep.initial_eval.success_rate;
    r.final_success = rep.final_eval.success_rate;
    r.final_progress = rep.final_eval.mean_progress;
    r.rollouts = rep.rollout_count;
    r.warm_started = rep.warm_started;
    if (seed_index == 0) rollouts_by_arm[arm.name] += rep.rollout_count;
    if (options.log) {
      options.log(arm.name + " seed " + std::to_string(seed_index) + " " + task.name + ": sr " +
                  fmt_short(r.final_success) + " iters " +
                  (r.iterations_to_threshold ? std::to_string(*r.iterations_to_threshold) : "-"));
    }
    report.runs.push_back(std::move(r));
  };

  const std::string tag = options.config.adapt.features.fingerprint();
  for (int s = 0; s < exp.seeds; ++s) {
    const std::uint64_t seed_value = Rng::mix(exp.base_seed + static_cast<std::uint64_t>(s));
    std::optional<MemoryBank> primed;
    std::int64_t priming_rollouts = 0;
    if (shared_priming) {
      const Arm& lead = arms.front();
      MemoryBank bank(tag, lead.bank_capacity);
      const auto before = rollouts_by_arm[lead.name];
      for (const auto& t : primes) run_one(lead, t, "prime", s, seed_value, exp.prime_iterations, bank);
      priming_rollouts = rollouts_by_arm[lead.name] - before;
      primed = std::move(bank);
    }
    for (std::size_t ai = 0; ai < arms.size(); ++ai) {
      const Arm& arm = arms[ai];
      MemoryBank bank(tag, arm.bank_capacity);
      if (primed) {
        bank = with_capacity(*primed, arm.bank_capacity);
        // Shared priming consumes the same budget for every arm.
        if (ai > 0 && s == 0) rollouts_by_arm[arm.name] += priming_rollouts;
      } else {
        for (const auto& t : primes) run_one(arm, t, "prime", s, seed_value, exp.prime_iterations, bank);
      }
      for (const auto& t : targets) run_one(arm, t, "target", s, seed_value, exp.target_iterations, bank);
    }
  }

  const double censored = exp.target_iterations + 1;
  for (const auto& arm : arms) {
    ArmSummary a;
    a.arm = arm.name;
    std::vector<double> iters, iters9, sr, prog, pre;
    for (const auto& r : report.runs) {
      if (r.arm != arm.name || r.role != "target") continue;
      ++a.runs;
      if (r.iterations_to_threshold) ++a.reached;
      iters.push_back(r.iterations_to_threshold ? *r.iterations_to_threshold : censored);
      iters9.push_back(r.iterations_to_0_9 ? *r.iterations_to_0_9 : censored);
      sr.push_back(r.final_success);
      prog.push_back(r.final_progress);
      pre.push_back(r.pre_success);
    }
    a.median_iterations = median(iters);
    a.median_iterations_0_9 = median(iters9);
    a.median_final_success = median(sr);
    a.median_final_progress = median(prog);
    a.median_pre_success = median(pre);
    a.rollouts_per_seed = rollouts_by_arm[arm.name];
    report.arms.push_back(std::move(a));
  }
  if (outputs.dir()) write_tables(*outputs.dir(), report);
  return report;
}

std::vector<Check> mode_checks(ExperimentMode mode, const ExperimentReport& r) {
  std::vector<Check> checks;
  // Matched budget holds across every arm.
  {
    Check c{"matched rollout budget", true, ""};
    for (const auto& a : r.arms) {
      if (a.rollouts_per_seed != r.arms.front().rollouts_per_seed) c.passed = false;
      c.detail += a.arm + "=" + std::to_string(a.rollouts_per_seed) + " ";
    }
    checks.push_back(std::move(c));
  }
  constexpr double kSlower = 1.10;
  switch (mode) {
    case ExperimentMode::kFull: {
      const auto& a = r.arm("full");
      checks.push_back({"full reaches threshold in most runs", 2 * a.reached > a.runs,
                        std::to_string(a.reached) + "/" + std::to_string(a.runs)});
      break;
    }
    case ExperimentMode::kAblateArs:
      checks.push_back(slower_check(r, "full", "no-ars", kSlower));
      break;
    case ExperimentMode::kAblateLge:
      checks.push_back(slower_check(r, "full", "no-lge", kSlower));
      break;
    case ExperimentMode::kAblateEm:
      checks.push_back(slower_check(r, "full", "no-em", kSlower));
      break;
    case ExperimentMode::kAblations:
      checks.push_back(slower_check(r, "full", "no-ars", kSlower));
      checks.push_back(slower_check(r, "full", "no-lge", kSlower));
      checks.push_back(slower_check(r, "full", "no-em", kSlower));
      break;
    case ExperimentMode::kUniformCurriculum:
      checks.push_back(slower_check(r, "ars", "uniform", 1.0));
      checks.push_back(slower_check(r, "ars", "progress-only", 1.0));
      break;
    case ExperimentMode::kColdVsWarm: {
      const double w = r.arm("warm").median_iterations;
      const double c = r.arm("cold").median_iterations;
      checks.push_back({"warm <= 0.75 x cold", w <= 0.75 * c,
                        "warm=" + fmt_short(w) + " cold=" + fmt_short(c)});
      break;
    }
    case ExperimentMode::kTransfer: {
      const auto& a = r.arm("transfer");
      checks.push_back({"pre-adaptation success <= 0.05", a.median_pre_success <= 0.05,
                        "median pre=" + fmt_short(a.median_pre_success)});
      checks.push_back({"post-adaptation success > 0", a.median_final_success > 0.0,
                        "median final=" + fmt_short(a.median_final_success)});
      break;
    }
    case ExperimentMode::kMemorySensitivity: {
      // The default against the most extreme setting of each swept axis.
      const ArmSummary* worst_tau = nullptr;
      const ArmSummary* worst_k = nullptr;
      const ArmSummary* worst_cap = nullptr;
      double max_tau = -1, min_cap = 1e300;
      std::size_t max_k = 0;
      for (const auto& a : r.arms) {
        if (a.arm.rfind("tau=", 0) == 0 && std::stod(a.arm.substr(4)) > max_tau) {
          max_tau = std::stod(a.arm.substr(4));
          worst_tau = &a;
        } else if (a.arm.rfind("k=", 0) == 0 && std::stoul(a.arm.substr(2)) > max_k) {
          max_k = std::stoul(a.arm.substr(2));
          worst_k = &a;
        } else if (a.arm.rfind("capacity=", 0) == 0 && std::stod(a.arm.substr(9)) < min_cap) {
          min_cap = std::stod(a.arm.substr(9));
          worst_cap = &a;
        }
      }
      for (const ArmSummary* a : {worst_tau, worst_k, worst_cap}) {
        if (a != nullptr) checks.push_back(at_most_check(r, "default", a->arm));
      }
      break;
    }
  }
  return checks;
}

ExperimentReport run_experiment(const Suite& suite, ExperimentMode mode,
                                const ExperimentOptions& options) {
  const bool shared = mode == ExperimentMode::kColdVsWarm ||
                      mode == ExperimentMode::kMemorySensitivity;
  auto report = run_arms(suite, arms_for_mode(mode, options.config), shared, options);
  report.mode = mode;
  report.checks = mode_checks(mode, report);
  if (options.out_dir) write_tables(*options.out_dir, report);
  return report;
}

}  // namespace avla
