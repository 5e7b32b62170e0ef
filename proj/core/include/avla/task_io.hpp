#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "avla/templates.hpp"
#include "avla/world.hpp"

namespace avla {

// A task together with its role in an experiment: "prime" tasks populate
// the memory bank, "target" tasks are measured.
struct SuiteEntry {
  TaskSpec task;
  std::string role = "target";
};

struct Suite {
  std::string name;
  std::vector<SuiteEntry> entries;

  [[nodiscard]] std::vector<TaskSpec> with_role(std::string_view role) const;
  [[nodiscard]] std::vector<TaskSpec> tasks() const;
};

// JSON suite schema (see docs/formats.md):
//   { "name": str, "tasks": [ { "id", "instruction", "family"?, "role"?,
//     "grid": [w, h], "gripper": [x, y], "horizon",
//     "entities": [ { "id", "kind", "pos": [x, y], "toggled"? } ],
//     "held"? } ] }
// Sub-goals come from decomposing the instruction. Invariants are checked
// on read; violations throw InvalidTask.
Suite parse_suite(std::string_view json_text, const TemplateSet& templates);
Suite load_suite(const std::filesystem::path& path, const TemplateSet& templates);
std::string dump_suite(const Suite& suite);

}  // namespace avla
