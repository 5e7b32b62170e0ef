#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace avla {

// Primitive gripper actions. The action set is fixed; policy parameter
// layouts depend on this ordering.
enum class Action : std::uint8_t { kUp, kDown, kLeft, kRight, kGrasp, kRelease, kToggle };

inline constexpr std::size_t kNumActions = 7;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::kUp,    Action::kDown,    Action::kLeft,  Action::kRight,
    Action::kGrasp, Action::kRelease, Action::kToggle};

std::string_view action_name(Action a);
std::optional<Action> parse_action(std::string_view name);

// Grid cell. x grows to the right, y grows upward.
struct Cell {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

int chebyshev(Cell a, Cell b);

enum class EntityKind : std::uint8_t { kObject, kToggle, kContainer, kSurface };

std::string_view kind_name(EntityKind k);
std::optional<EntityKind> parse_kind(std::string_view name);

struct Entity {
  std::string id;
  EntityKind kind = EntityKind::kObject;
  Cell pos;
  bool toggled = false;
  friend bool operator==(const Entity&, const Entity&) = default;
};

// Full symbolic world state. Treated as an immutable value: step() returns
// a successor and never mutates its input.
struct WorldState {
  int width = 1;
  int height = 1;
  Cell gripper;
  std::optional<std::size_t> held;  // index into entities
  std::vector<Entity> entities;
  std::int64_t step_count = 0;

  [[nodiscard]] bool in_bounds(Cell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height;
  }
  // Largest Chebyshev distance between two cells of the grid.
  [[nodiscard]] int diameter() const { return std::max(width, height) - 1; }
  // Index of the entity with this id, or nullopt.
  [[nodiscard]] std::optional<std::size_t> find(std::string_view id) const;
  [[nodiscard]] const Entity& entity(std::string_view id) const;  // throws MissingEntity

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

// Checks the WorldState invariants; throws InvalidTask with the first
// violation found.
void validate_state(const WorldState& s);

WorldState step(const WorldState& state, Action action);

enum class PredicateKind : std::uint8_t { kNear, kHolding, kToggled, kPlaced };

std::string_view predicate_name(PredicateKind k);

struct Predicate {
  PredicateKind kind = PredicateKind::kNear;
  std::string entity;
  std::string target;  // only used by kPlaced
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct SubGoal {
  int id = 1;  // 1-based, contiguous in task order
  std::string description;
  Predicate predicate;
  friend bool operator==(const SubGoal&, const SubGoal&) = default;
};

// near: Chebyshev distance <= 1; holding: held entity matches;
// toggled: flag set; placed: entity on target cell and not held.
bool eval_predicate(const WorldState& s, const SubGoal& g);

// Normalized distance-to-satisfaction in [0,1]; 0 whenever the predicate
// holds. near: Chebyshev(gripper, entity) / diameter; placed: Chebyshev
// (entity, target) / diameter, at least 1 / diameter while unsatisfied;
// holding / toggled: 1 until satisfied.
double distance_to_satisfaction(const WorldState& s, const SubGoal& g);

// clamp(d(a) - d(b), 0, 1).
double oracle_progress(const WorldState& a, const WorldState& b, const SubGoal& g);

struct TaskSpec {
  std::string name;  // suite-unique id
  std::string instruction;
  WorldState layout;
  std::vector<SubGoal> subgoals;
  int horizon = 1;
  std::string family_tag;

  [[nodiscard]] std::size_t num_subgoals() const { return subgoals.size(); }
  [[nodiscard]] bool succeeded(const WorldState& s) const {
    return eval_predicate(s, subgoals.back());
  }
};

// Validates layout plus sub-goal references; throws InvalidTask.
void validate_task(const TaskSpec& task);

// Per-sub-goal completion flags for the current state. A sub-goal counts as
// complete when its predicate holds, or when it is a means-type predicate
// (near/holding) on an entity that a later, currently satisfied
// toggled/holding/placed sub-goal references. This lets transient
// predicates stay complete once the task has moved past them.
std::vector<bool> completion_flags(const WorldState& s, const TaskSpec& task);

// Index (0-based) of the first incomplete sub-goal, or nullopt when all
// are complete.
std::optional<std::size_t> active_subgoal(const WorldState& s, const TaskSpec& task);

// Step that moves the gripper one cell toward `to`: along the axis with the
// larger gap, horizontal on ties. nullopt when already there.
std::optional<Action> move_toward(Cell from, Cell to);

// Reference controller used by scripts and tests: works on the active
// sub-goal, moving toward its entity and acting when co-located.
Action scripted_action(const WorldState& s, const TaskSpec& task);

// Runs scripted_action from the layout until success or horizon. Returns
// the action sequence.
std::vector<Action> scripted_episode(const TaskSpec& task);

}  // namespace avla
