#include "avla/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "avla/errors.hpp"
#include "avla/templates.hpp"

namespace avla {

namespace {

// Stream ids keep rollout, critic and evaluation randomness independent.
constexpr std::uint64_t kRolloutStream = 1;
constexpr std::uint64_t kCriticStream = 2;
constexpr std::uint64_t kEvalStream = 3;

std::uint64_t stream_id(std::uint64_t kind, std::uint64_t iteration, std::uint64_t index) {
  return Rng::mix(kind * 0x100000001b3ULL ^ Rng::mix(iteration * 1000003ULL + index));
}

void emit(const AdaptHooks& hooks, std::string_view event, int iteration) {
  if (hooks.on_event) hooks.on_event(event, iteration);
}

double completed_fraction(const WorldState& s, const TaskSpec& task) {
  const auto done = completion_flags(s, task);
  const auto n = static_cast<double>(std::count(done.begin(), done.end(), true));
  return n / static_cast<double>(done.size());
}

}  // namespace

void validate_config(const AdaptConfig& c) {
  if (c.n_iterations < 0) throw ConfigError("n_iterations must be non-negative");
  if (c.rollouts_per_iteration <= 0 || c.group_size <= 0) {
    throw ConfigError("rollout and group counts must be positive");
  }
  if (c.group_size < 2) throw ConfigError("group_size must be at least 2");
  if (c.rollouts_per_iteration % c.group_size != 0) {
    throw ConfigError("rollouts_per_iteration must be divisible by group_size");
  }
  if (c.horizon <= 0) throw ConfigError("horizon must be positive");
  if (c.eval_every <= 0 || c.eval_episodes <= 0) {
    throw ConfigError("eval_every and eval_episodes must be positive");
  }
  if (!(c.success_threshold >= 0.0 && c.success_threshold <= 1.0)) {
    throw ConfigError("success_threshold must lie in [0, 1]");
  }
  if (!(c.explore_temperature > 0.0 && c.eval_temperature > 0.0)) {
    throw ConfigError("temperatures must be positive");
  }
  if (!(c.critic_sigma >= 0.0)) throw ConfigError("critic_sigma must be non-negative");
  if (c.retrieval_k == 0 || !(c.retrieval_tau > 0.0)) {
    throw ConfigError("retrieval k and tau must be positive");
  }
  validate_grpo_config(c.grpo);
  validate_schedule(c.schedule);
}

PolicyParams base_policy(const AdaptConfig& config) {
  return hint_following_prior(config.features, config.prior_gain);
}

EvalResult evaluate_controller(const std::function<Action(const WorldState&, Rng&)>& controller,
                               const TaskSpec& task, int n_episodes, int horizon_cap) {
  if (n_episodes < 1) throw ConfigError("n_episodes must be at least 1");
  const int horizon = std::min(task.horizon, horizon_cap);
  Rng rng(0);
  int successes = 0;
  double progress = 0.0;
  for (int ep = 0; ep < n_episodes; ++ep) {
    WorldState s = task.layout;
    bool success = task.succeeded(s);
    for (int t = 0; t < horizon && !success; ++t) {
      s = step(s, controller(s, rng));
      success = task.succeeded(s);
    }
    successes += success ? 1 : 0;
    progress += completed_fraction(s, task);
  }
  return {static_cast<double>(successes) / n_episodes, progress / n_episodes};
}

EvalResult evaluate(const PolicyParams& params, const TaskSpec& task, int n_episodes,
                    std::uint64_t seed, const EvalOptions& options) {
  if (n_episodes < 1) throw ConfigError("n_episodes must be at least 1");
  const int horizon = std::min(task.horizon, options.horizon_cap);
  const Suggestion none = no_suggestion(options.features.suggestion_dim);
  const Rng root(seed);
  int successes = 0;
  double progress = 0.0;
  // Greedy episodes on a deterministic world are identical; run one.
  const int distinct = options.greedy ? 1 : n_episodes;
  for (int ep = 0; ep < distinct; ++ep) {
    Rng rng = root.split(static_cast<std::uint64_t>(ep));
    WorldState s = task.layout;
    bool success = task.succeeded(s);
    for (int t = 0; t < horizon && !success; ++t) {
      const auto f = featurize(s, task, none, options.features);
      const auto probs = action_distribution(params, f, options.temperature);
      const Action a = options.greedy ? greedy_action(probs) : sample_action(probs, rng);
      s = step(s, a);
      success = task.succeeded(s);
    }
    successes += success ? 1 : 0;
    progress += completed_fraction(s, task);
  }
  return {static_cast<double>(successes) / distinct, progress / distinct};
}

Trajectory rollout(const PolicyParams& params, const TaskSpec& task, const AdaptConfig& config,
                   const SuggestionSchedule& schedule, SuggestionProvider* provider,
                   const CapabilityTracker& tracker, Rng& rng) {
  const int horizon = std::min(task.horizon, config.horizon);
  const std::size_t sugg_dim = config.features.suggestion_dim;
  Trajectory tr;
  tr.temperature = config.explore_temperature;
  tr.observations.reserve(static_cast<std::size_t>(horizon) + 1);
  tr.observations.push_back(task.layout);
  Suggestion active = no_suggestion(sugg_dim);
  bool done = task.succeeded(task.layout);
  for (int t = 0; t < horizon && !done; ++t) {
    const WorldState& s = tr.observations.back();
    if (provider != nullptr && t % schedule.interval == 0) {
      // A hint drawn at an opportunity stays active until the next one.
      active = should_suggest(schedule, t, rng) ? provider->suggest(s, task, tracker, rng)
                                                : no_suggestion(sugg_dim);
    }
    auto f = featurize(s, task, active, config.features);
    const auto probs = action_distribution(params, f, tr.temperature);
    const Action a = sample_action(probs, rng);
    tr.log_probs.push_back(std::log(probs[static_cast<std::size_t>(a)]));
    tr.actions.push_back(a);
    tr.features.push_back(std::move(f));
    tr.suggestions.push_back(active.text);
    tr.observations.push_back(step(s, a));
    done = task.succeeded(tr.observations.back());
  }
  return tr;
}

AdaptResult adapt(const TaskSpec& task, const PolicyParams& base_params, MemoryBank& bank,
                  const AdaptConfig& config, const AdaptHooks& hooks,
                  SuggestionProvider* provider) {
  validate_config(config);
  validate_task(task);
  AdaptReport report;

  PolicyParams params = base_params;
  if (config.use_memory) {
    params = warm_start(bank, task.instruction, base_params, config.retrieval_k,
                        config.retrieval_tau);
    report.warm_started = !bank.empty();
  }
  emit(hooks, "warm_start", 0);
  report.initial_params = params;

  const auto subgoals = TemplateSet::builtin().decompose(task.instruction);
  if (subgoals != task.subgoals) {
    throw InvalidTask("task sub-goals disagree with the decomposition of its instruction");
  }
  emit(hooks, "decompose", 0);
  const std::size_t k_count = subgoals.size();
  CapabilityTracker tracker(k_count, config.alpha, config.c_init);
  emit(hooks, "tracker_init", 0);

  // Reward view: the decomposed chain, or only the final predicate when
  // adaptive reward synthesis is disabled.
  const std::vector<SubGoal> reward_goals =
      config.use_ars ? subgoals : std::vector<SubGoal>{subgoals.back()};
  const WeightMode weight_mode =
      (!config.use_ars || config.uniform_weights) ? WeightMode::kUniform : WeightMode::kAdaptive;
  CapabilityTracker reward_tracker = config.use_ars ? tracker : CapabilityTracker(1, config.alpha);

  SuggestionSchedule schedule = config.schedule;
  HeuristicProvider heuristic(config.features.suggestion_dim);
  SuggestionProvider* hints = nullptr;
  if (config.use_lge) hints = provider != nullptr ? provider : &heuristic;
  const auto critic = make_critic(config.critic_sigma);

  const Rng root(config.seed);
  const EvalOptions eval_opts{config.eval_temperature, config.eval_greedy, config.horizon,
                              config.features};
  auto run_eval = [&](int iteration) {
    return evaluate(params, task, config.eval_episodes,
                    Rng::mix(config.seed ^ stream_id(kEvalStream, iteration, 0)), eval_opts);
  };
  report.initial_eval = run_eval(0);
  report.final_eval = report.initial_eval;
  const auto note_threshold = [&](int iteration, double success) {
    if (!report.iterations_to_threshold && success >= config.success_threshold) {
      report.iterations_to_threshold = iteration;
    }
    if (!report.iterations_to_0_9 && success >= 0.9) report.iterations_to_0_9 = iteration;
  };
  if (config.n_iterations > 0) note_threshold(0, report.initial_eval.success_rate);

  const int n_groups = config.rollouts_per_iteration / config.group_size;
  for (int it = 1; it <= config.n_iterations; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    rec.suggestion_probability = suggestion_probability(schedule);

    std::vector<Trajectory> batch;
    batch.reserve(static_cast<std::size_t>(config.rollouts_per_iteration));
    std::size_t hinted_steps = 0, total_steps = 0;
    for (int i = 0; i < config.rollouts_per_iteration; ++i) {
      Rng rng = root.split(stream_id(kRolloutStream, static_cast<std::uint64_t>(it),
                                     static_cast<std::uint64_t>(i)));
      batch.push_back(rollout(params, task, config, schedule, hints, tracker, rng));
      for (const auto& s : batch.back().suggestions) hinted_steps += s.empty() ? 0 : 1;
      total_steps += batch.back().length();
    }
    rec.suggestion_coverage =
        total_steps > 0 ? static_cast<double>(hinted_steps) / static_cast<double>(total_steps)
                        : 0.0;
    emit(hooks, "rollouts", it);

    // Rewards use the tracker as it stood before this batch.
    std::vector<RewardBreakdown> rewards;
    rewards.reserve(batch.size());
    double reward_sum = 0.0, progress_sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      Rng rng = root.split(stream_id(kCriticStream, static_cast<std::uint64_t>(it), i));
      rewards.push_back(
          compute_reward(batch[i], reward_goals, reward_tracker, *critic, rng, weight_mode));
      reward_sum += rewards.back().total;
      for (double d : rewards.back().deltas) progress_sum += d;
    }
    rec.mean_reward = reward_sum / static_cast<double>(batch.size());
    // The suggestion schedule tracks unweighted progress: capability
    // weighting shrinks R as sub-goals are mastered, which would otherwise
    // keep hints at full rate exactly when the policy is competent.
    const double mean_progress_reward = progress_sum / static_cast<double>(batch.size());
    emit(hooks, "rewards", it);

    std::vector<RolloutGroup> groups(static_cast<std::size_t>(n_groups));
    for (int g = 0; g < n_groups; ++g) {
      auto& group = groups[static_cast<std::size_t>(g)];
      for (int j = 0; j < config.group_size; ++j) {
        const auto idx = static_cast<std::size_t>(g * config.group_size + j);
        group.trajectories.push_back(std::move(batch[idx]));
        group.rewards.push_back(rewards[idx].total);
      }
    }
    emit(hooks, "advantages", it);

    try {
      params = update(params, groups, config.grpo);
    } catch (const NonFiniteGradient&) {
      rec.update_skipped = true;
    }
    emit(hooks, "grpo_update", it);

    // One update per sub-goal per episode: success = predicate held at any
    // step. The reward view's tracker follows the same indicators.
    for (const auto& group : groups) {
      for (const auto& tr : group.trajectories) {
        const auto hit = subgoal_successes(tr, subgoals);
        for (std::size_t k = 0; k < k_count; ++k) tracker.update(k + 1, hit[k]);
      }
    }
    if (config.use_ars) {
      reward_tracker = tracker;
    } else {
      for (const auto& group : groups) {
        for (const auto& tr : group.trajectories) {
          reward_tracker.update(1, task.succeeded(tr.final_state()));
        }
      }
    }
    emit(hooks, "capability_update", it);

    update_reward_average(schedule, mean_progress_reward, reward_goals.size());
    emit(hooks, "schedule_update", it);

    rec.capabilities = tracker.estimates();
    rec.weights = tracker.weights();
    report.rollout_count += config.rollouts_per_iteration;
    rec.rollout_count = report.rollout_count;

    bool stop = false;
    if (it % config.eval_every == 0 || it == config.n_iterations) {
      const auto ev = run_eval(it);
      rec.eval_success_rate = ev.success_rate;
      rec.eval_progress = ev.mean_progress;
      report.final_eval = ev;
      note_threshold(it, ev.success_rate);
      emit(hooks, "evaluate", it);
      stop = config.early_stop && ev.success_rate >= config.success_threshold;
    }
    report.iterations.push_back(rec);
    if (hooks.on_iteration) hooks.on_iteration(report.iterations.back());
    if (stop) break;
  }

  report.final_params = params;
  if (config.use_memory &&
      report.final_eval.success_rate >= config.memory_insert_threshold) {
    std::int64_t created_at = 0;
    for (const auto& e : bank.entries()) created_at = std::max(created_at, e.meta.created_at + 1);
    const auto iters = static_cast<std::uint32_t>(report.iterations.size());
    bank.insert(make_entry(task.instruction, params, report.final_eval.success_rate, iters,
                           static_cast<std::uint32_t>(k_count), created_at));
    report.inserted_into_bank = true;
    emit(hooks, "memory_insert", static_cast<int>(report.iterations.size()));
  }
  return {params, std::move(report)};
}

}  // namespace avla
