#pragma once

#include <functional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "avla/world.hpp"

namespace avla {

// One instruction grammar: a regular expression over the normalized
// instruction and an expansion of its captured noun phrases into an ordered
// sub-goal list.
struct InstructionTemplate {
  std::string family;
  std::string pattern;
  std::function<std::vector<SubGoal>(const std::vector<std::string>& entities)> expand;
};

class TemplateSet {
 public:
  // Registers the shipped families: approach, toggle-then-place, pick-place,
  // open-then-insert, multi-object and carry-to.
  static TemplateSet builtin();

  void add(InstructionTemplate t);

  // First registered template whose grammar matches wins.
  [[nodiscard]] std::vector<SubGoal> decompose(std::string_view instruction) const;
  [[nodiscard]] std::string family_of(std::string_view instruction) const;

 private:
  struct Compiled {
    InstructionTemplate spec;
    std::regex re;
  };
  const Compiled& match(std::string_view instruction, std::vector<std::string>& entities) const;

  std::vector<Compiled> templates_;
};

// Lowercases, strips punctuation other than hyphens and collapses spaces.
std::string normalize_instruction(std::string_view instruction);

// Entity id for a noun phrase: its head (last) word, e.g. "moka pot" -> "pot".
std::string entity_id_for(std::string_view noun_phrase);

std::vector<SubGoal> decompose(std::string_view instruction, const TemplateSet& templates);

// Task library used by the CLI and tests: every family with at least three
// entity-name variants, plus the canonical stove layouts.
std::vector<TaskSpec> builtin_library();
const TaskSpec& find_task(const std::vector<TaskSpec>& tasks, std::string_view name);

}  // namespace avla
