#pragma once

#include <string>
#include <vector>

#include "avla/policy.hpp"
#include "avla/world.hpp"

namespace avla {

// One rollout. observations has one more element than actions: the state
// before each action plus the final state.
struct Trajectory {
  std::vector<WorldState> observations;
  std::vector<Action> actions;
  std::vector<FeatureVector> features;  // policy inputs as recorded, suggestion block included
  std::vector<double> log_probs;        // log pi_old(a_t | f_t) at `temperature`
  std::vector<std::string> suggestions; // active hint text per step, empty when none
  double temperature = 1.0;

  [[nodiscard]] std::size_t length() const { return actions.size(); }
  [[nodiscard]] const WorldState& final_state() const { return observations.back(); }
};

}  // namespace avla
