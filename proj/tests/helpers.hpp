#pragma once

#include <string>
#include <vector>

#include "avla/rng.hpp"
#include "avla/templates.hpp"
#include "avla/world.hpp"

namespace avla::test {

inline const std::vector<TaskSpec>& library() {
  static const std::vector<TaskSpec> lib = builtin_library();
  return lib;
}

inline const TaskSpec& task(const std::string& name) { return find_task(library(), name); }

inline Action random_action(Rng& rng) {
  return kAllActions[static_cast<std::size_t>(rng.next_u64() % kNumActions)];
}

// State reached by a random walk from the task layout.
inline WorldState random_walk(const TaskSpec& t, int steps, Rng& rng) {
  WorldState s = t.layout;
  for (int i = 0; i < steps; ++i) s = step(s, random_action(rng));
  return s;
}

// Entirely random valid state over the task's entities (ignores reachability).
inline WorldState random_state(const TaskSpec& t, Rng& rng) {
  WorldState s = t.layout;
  auto cell = [&] {
    return Cell{static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(s.width)),
                static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(s.height))};
  };
  s.gripper = cell();
  for (auto& e : s.entities) {
    e.pos = rng.uniform() < 0.3 ? s.gripper : cell();
    e.toggled = rng.uniform() < 0.5;
  }
  s.held.reset();
  if (rng.uniform() < 0.4) {
    for (std::size_t i = 0; i < s.entities.size(); ++i) {
      if (s.entities[i].kind == EntityKind::kObject && s.entities[i].pos == s.gripper) {
        s.held = i;
        break;
      }
    }
  }
  return s;
}

}  // namespace avla::test
