#include "avla/world.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "avla/errors.hpp"

namespace avla {

namespace {

constexpr std::array<std::string_view, kNumActions> kActionNames = {
    "up", "down", "left", "right", "grasp", "release", "toggle"};

constexpr std::array<std::string_view, 4> kKindNames = {"object", "toggle", "container",
                                                        "surface"};

bool toggleable(EntityKind k) { return k == EntityKind::kToggle || k == EntityKind::kContainer; }

bool means_type(PredicateKind k) {
  return k == PredicateKind::kNear || k == PredicateKind::kHolding;
}

bool references(const Predicate& p, std::string_view id) {
  return p.entity == id || (p.kind == PredicateKind::kPlaced && p.target == id);
}

}  // namespace

std::string_view action_name(Action a) { return kActionNames[static_cast<std::size_t>(a)]; }

std::optional<Action> parse_action(std::string_view name) {
  for (std::size_t i = 0; i < kNumActions; ++i) {
    if (kActionNames[i] == name) return kAllActions[i];
  }
  return std::nullopt;
}

int chebyshev(Cell a, Cell b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

std::string_view kind_name(EntityKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<EntityKind> parse_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<EntityKind>(i);
  }
  return std::nullopt;
}

std::string_view predicate_name(PredicateKind k) {
  switch (k) {
    case PredicateKind::kNear: return "near";
    case PredicateKind::kHolding: return "holding";
    case PredicateKind::kToggled: return "toggled";
    case PredicateKind::kPlaced: return "placed";
  }
  return "?";
}

std::optional<std::size_t> WorldState::find(std::string_view id) const {
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (entities[i].id == id) return i;
  }
  return std::nullopt;
}

const Entity& WorldState::entity(std::string_view id) const {
  auto idx = find(id);
  if (!idx) throw MissingEntity("no entity '" + std::string(id) + "'");
  return entities[*idx];
}

void validate_state(const WorldState& s) {
  if (s.width < 1 || s.height < 1) throw InvalidTask("grid must be at least 1x1");
  if (!s.in_bounds(s.gripper)) throw InvalidTask("gripper outside grid");
  std::set<std::string> ids;
  for (const auto& e : s.entities) {
    if (e.id.empty()) throw InvalidTask("entity with empty id");
    if (!ids.insert(e.id).second) throw InvalidTask("duplicate entity id '" + e.id + "'");
    if (!s.in_bounds(e.pos)) throw InvalidTask("entity '" + e.id + "' outside grid");
  }
  if (s.held) {
    if (*s.held >= s.entities.size()) throw InvalidTask("held index out of range");
    const auto& h = s.entities[*s.held];
    if (h.kind != EntityKind::kObject) throw InvalidTask("held entity is not an object");
    if (h.pos != s.gripper) throw InvalidTask("held entity not at gripper");
  }
  if (s.step_count < 0) throw InvalidTask("negative step count");
}

WorldState step(const WorldState& state, Action action) {
  WorldState next = state;
  ++next.step_count;
  auto move = [&](int dx, int dy) {
    next.gripper.x = std::clamp(next.gripper.x + dx, 0, next.width - 1);
    next.gripper.y = std::clamp(next.gripper.y + dy, 0, next.height - 1);
    if (next.held) next.entities[*next.held].pos = next.gripper;
  };
  switch (action) {
    case Action::kUp: move(0, 1); break;
    case Action::kDown: move(0, -1); break;
    case Action::kLeft: move(-1, 0); break;
    case Action::kRight: move(1, 0); break;
    case Action::kGrasp:
      if (!next.held) {
        for (std::size_t i = 0; i < next.entities.size(); ++i) {
          const auto& e = next.entities[i];
          if (e.kind == EntityKind::kObject && e.pos == next.gripper) {
            next.held = i;
            break;
          }
        }
      }
      break;
    case Action::kRelease: next.held.reset(); break;
    case Action::kToggle:
      for (auto& e : next.entities) {
        if (toggleable(e.kind) && e.pos == next.gripper) {
          e.toggled = !e.toggled;
          break;
        }
      }
      break;
  }
  return next;
}

bool eval_predicate(const WorldState& s, const SubGoal& g) {
  const auto& p = g.predicate;
  const auto idx = s.find(p.entity);
  if (!idx) throw MissingEntity("sub-goal " + std::to_string(g.id) + " references '" + p.entity + "'");
  const Entity& e = s.entities[*idx];
  switch (p.kind) {
    case PredicateKind::kNear: return chebyshev(s.gripper, e.pos) <= 1;
    case PredicateKind::kHolding: return s.held == idx;
    case PredicateKind::kToggled: return e.toggled;
    case PredicateKind::kPlaced: {
      const Entity& t = s.entity(p.target);
      return e.pos == t.pos && s.held != idx;
    }
  }
  return false;
}

double distance_to_satisfaction(const WorldState& s, const SubGoal& g) {
  if (eval_predicate(s, g)) return 0.0;
  const auto& p = g.predicate;
  const int diam = s.diameter();
  switch (p.kind) {
    case PredicateKind::kNear:
      if (diam == 0) return 0.0;
      return static_cast<double>(chebyshev(s.gripper, s.entity(p.entity).pos)) / diam;
    case PredicateKind::kPlaced:
      if (diam == 0) return 0.0;
      // Co-located but still held is one release away, not done.
      return static_cast<double>(
                 std::max(1, chebyshev(s.entity(p.entity).pos, s.entity(p.target).pos))) /
             diam;
    case PredicateKind::kHolding:
    case PredicateKind::kToggled: return 1.0;
  }
  return 1.0;
}

double oracle_progress(const WorldState& a, const WorldState& b, const SubGoal& g) {
  return std::clamp(distance_to_satisfaction(a, g) - distance_to_satisfaction(b, g), 0.0, 1.0);
}

void validate_task(const TaskSpec& task) {
  validate_state(task.layout);
  if (task.instruction.empty()) throw InvalidTask("empty instruction");
  if (task.horizon <= 0) throw InvalidTask("horizon must be positive");
  if (task.subgoals.empty()) throw InvalidTask("task has no sub-goals");
  for (std::size_t k = 0; k < task.subgoals.size(); ++k) {
    const auto& g = task.subgoals[k];
    if (g.id != static_cast<int>(k) + 1) throw InvalidTask("sub-goal ids must be 1..K in order");
    if (!task.layout.find(g.predicate.entity)) {
      throw InvalidTask("sub-goal '" + g.description + "' references unknown entity '" +
                        g.predicate.entity + "'");
    }
    if (g.predicate.kind == PredicateKind::kPlaced && !task.layout.find(g.predicate.target)) {
      throw InvalidTask("sub-goal '" + g.description + "' references unknown target '" +
                        g.predicate.target + "'");
    }
  }
}

std::vector<bool> completion_flags(const WorldState& s, const TaskSpec& task) {
  const std::size_t k_count = task.subgoals.size();
  std::vector<bool> holds(k_count);
  for (std::size_t k = 0; k < k_count; ++k) holds[k] = eval_predicate(s, task.subgoals[k]);
  std::vector<bool> done = holds;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (done[k] || !means_type(task.subgoals[k].predicate.kind)) continue;
    const auto& id = task.subgoals[k].predicate.entity;
    for (std::size_t j = k + 1; j < k_count; ++j) {
      const auto& pj = task.subgoals[j].predicate;
      if (holds[j] && pj.kind != PredicateKind::kNear && references(pj, id)) {
        done[k] = true;
        break;
      }
    }
  }
  return done;
}

std::optional<std::size_t> active_subgoal(const WorldState& s, const TaskSpec& task) {
  const auto done = completion_flags(s, task);
  for (std::size_t k = 0; k < done.size(); ++k) {
    if (!done[k]) return k;
  }
  return std::nullopt;
}

std::optional<Action> move_toward(Cell from, Cell to) {
  const int dx = to.x - from.x;
  const int dy = to.y - from.y;
  if (dx == 0 && dy == 0) return std::nullopt;
  if (std::abs(dx) >= std::abs(dy)) return dx > 0 ? Action::kRight : Action::kLeft;
  return dy > 0 ? Action::kUp : Action::kDown;
}

Action scripted_action(const WorldState& s, const TaskSpec& task) {
  const auto k = active_subgoal(s, task);
  if (!k) return Action::kRelease;
  const auto& p = task.subgoals[*k].predicate;
  const std::size_t e_idx = *s.find(p.entity);
  const Entity& e = s.entities[e_idx];
  const auto go = [&](Cell c) { return move_toward(s.gripper, c).value_or(Action::kRelease); };
  switch (p.kind) {
    case PredicateKind::kNear: return go(e.pos);
    case PredicateKind::kToggled:
      return s.gripper == e.pos ? Action::kToggle : go(e.pos);
    case PredicateKind::kHolding:
      if (s.held && *s.held != e_idx) return Action::kRelease;
      return s.gripper == e.pos ? Action::kGrasp : go(e.pos);
    case PredicateKind::kPlaced: {
      const Cell target = s.entity(p.target).pos;
      if (s.held == e_idx) return s.gripper == target ? Action::kRelease : go(target);
      if (s.held) return Action::kRelease;
      return s.gripper == e.pos ? Action::kGrasp : go(e.pos);
    }
  }
  return Action::kRelease;
}

std::vector<Action> scripted_episode(const TaskSpec& task) {
  std::vector<Action> actions;
  WorldState s = task.layout;
  for (int t = 0; t < task.horizon && !task.succeeded(s); ++t) {
    const Action a = scripted_action(s, task);
    actions.push_back(a);
    s = step(s, a);
  }
  return actions;
}

}  // namespace avla
