#include "avla/lge.hpp"

#include <cmath>

#include "avla/errors.hpp"

namespace avla {

namespace {

bool references(const Predicate& p, std::string_view id) {
  return p.entity == id || (p.kind == PredicateKind::kPlaced && p.target == id);
}

std::string_view direction_word(Action a) { return action_name(a); }

// Index of the first sub-goal whose satisfaction requires holding `id`.
std::optional<std::size_t> acquire_index(const TaskSpec& task, std::string_view id) {
  for (std::size_t j = 0; j < task.subgoals.size(); ++j) {
    const auto& p = task.subgoals[j].predicate;
    if ((p.kind == PredicateKind::kHolding || p.kind == PredicateKind::kPlaced) &&
        p.entity == id) {
      return j;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string heuristic_hint(const WorldState& obs, const TaskSpec& task) {
  const auto done = completion_flags(obs, task);
  std::optional<std::size_t> active;
  for (std::size_t k = 0; k < done.size(); ++k) {
    if (!done[k]) {
      active = k;
      break;
    }
  }
  if (!active) return {};
  const std::size_t k = *active;
  const SubGoal& g = task.subgoals[k];
  const auto& p = g.predicate;
  const std::size_t e_idx = *obs.find(p.entity);
  const Entity& e = obs.entities[e_idx];

  std::optional<std::string> ordering;
  if (obs.held) {
    const std::string& held_id = obs.entities[*obs.held].id;
    const auto acquired_at = acquire_index(task, held_id);
    if (!references(p, held_id) && acquired_at && *acquired_at > k) {
      ordering = "complete " + g.description + " before " + task.subgoals[k + 1].description;
    }
  }

  const bool needs_object = p.kind == PredicateKind::kHolding || p.kind == PredicateKind::kPlaced;
  if (needs_object && obs.held && *obs.held != e_idx) {
    if (ordering) return *ordering;
    return "release " + obs.entities[*obs.held].id;
  }

  Cell target = e.pos;
  switch (p.kind) {
    case PredicateKind::kNear: break;
    case PredicateKind::kToggled:
      if (obs.gripper == e.pos) return "toggle " + e.id;
      break;
    case PredicateKind::kHolding:
      if (obs.gripper == e.pos) return "grasp " + e.id;
      break;
    case PredicateKind::kPlaced: {
      const Entity& dst = obs.entity(p.target);
      if (obs.held == e_idx) {
        if (obs.gripper == dst.pos) return "release " + e.id;
        target = dst.pos;
        if (ordering) return *ordering;
        return "move " + std::string(direction_word(*move_toward(obs.gripper, target))) +
               " toward " + dst.id;
      }
      if (obs.gripper == e.pos) return "grasp " + e.id;
      break;
    }
  }
  if (ordering) return *ordering;
  const auto step_dir = move_toward(obs.gripper, target);
  if (!step_dir) return {};
  return "move " + std::string(direction_word(*step_dir)) + " toward " + e.id;
}

Suggestion HeuristicProvider::suggest(const WorldState& obs, const TaskSpec& task,
                                      const CapabilityTracker& /*tracker*/, Rng& /*rng*/) {
  auto text = heuristic_hint(obs, task);
  if (text.empty()) return no_suggestion(dim_);
  return make_suggestion(std::move(text), SuggestionSource::kHeuristic, dim_);
}

void validate_schedule(const SuggestionSchedule& sched) {
  if (!(sched.p_max > 0.0 && sched.p_max <= 1.0)) throw ConfigError("p_max must lie in (0, 1]");
  if (!(sched.lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (!(sched.r_bar >= 0.0)) throw ConfigError("r_bar must be non-negative");
  if (!(sched.beta >= 0.0 && sched.beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
  if (sched.interval <= 0) throw ConfigError("suggestion interval must be positive");
}

double suggestion_probability(const SuggestionSchedule& sched) {
  return sched.p_max * std::exp(-sched.lambda * sched.r_bar);
}

void update_reward_average(SuggestionSchedule& sched, double batch_mean_reward,
                           std::size_t num_subgoals) {
  const double normalized =
      num_subgoals == 0 ? 0.0 : std::max(0.0, batch_mean_reward) / static_cast<double>(num_subgoals);
  sched.r_bar = sched.beta * sched.r_bar + (1.0 - sched.beta) * normalized;
}

bool should_suggest(const SuggestionSchedule& sched, std::int64_t t, Rng& rng) {
  if (t < 0 || t % sched.interval != 0) return false;
  return rng.bernoulli(suggestion_probability(sched));
}

}  // namespace avla
