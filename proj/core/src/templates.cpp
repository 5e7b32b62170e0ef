#include "avla/templates.hpp"

#include <cctype>
#include <sstream>

#include "avla/errors.hpp"

namespace avla {

namespace {

SubGoal make(PredicateKind kind, std::string description, std::string entity,
             std::string target = {}) {
  SubGoal g;
  g.description = std::move(description);
  g.predicate = {kind, std::move(entity), std::move(target)};
  return g;
}

std::vector<SubGoal> numbered(std::vector<SubGoal> goals) {
  for (std::size_t i = 0; i < goals.size(); ++i) goals[i].id = static_cast<int>(i) + 1;
  return goals;
}

using PK = PredicateKind;

std::vector<SubGoal> approach(const std::vector<std::string>& e) {
  return numbered({make(PK::kNear, "approach-" + e[0], e[0])});
}

std::vector<SubGoal> toggle_then_place(const std::vector<std::string>& e) {
  const auto& app = e[0];
  const auto& obj = e[1];
  return numbered({make(PK::kNear, "approach-" + app, app),
                   make(PK::kToggled, "toggle-" + app, app),
                   make(PK::kNear, "approach-" + obj, obj),
                   make(PK::kHolding, "grasp-" + obj, obj),
                   make(PK::kPlaced, "place-" + obj, obj, app)});
}

std::vector<SubGoal> pick_place(const std::vector<std::string>& e) {
  const auto& obj = e[0];
  const auto& dst = e[1];
  return numbered({make(PK::kNear, "approach-" + obj, obj),
                   make(PK::kHolding, "grasp-" + obj, obj),
                   make(PK::kNear, "approach-" + dst, dst),
                   make(PK::kPlaced, "place-" + obj, obj, dst)});
}

std::vector<SubGoal> open_then_insert(const std::vector<std::string>& e) {
  const auto& box = e[0];
  const auto& obj = e[1];
  return numbered({make(PK::kNear, "approach-" + box, box),
                   make(PK::kToggled, "open-" + box, box),
                   make(PK::kNear, "approach-" + obj, obj),
                   make(PK::kHolding, "grasp-" + obj, obj),
                   make(PK::kPlaced, "place-" + obj, obj, box)});
}

std::vector<SubGoal> multi_object(const std::vector<std::string>& e) {
  const auto& first = e[0];
  const auto& second = e[1];
  const auto& dst = e[2];
  return numbered({make(PK::kNear, "approach-" + first, first),
                   make(PK::kHolding, "grasp-" + first, first),
                   make(PK::kPlaced, "place-" + first, first, dst),
                   make(PK::kNear, "approach-" + second, second),
                   make(PK::kHolding, "grasp-" + second, second),
                   make(PK::kPlaced, "place-" + second, second, dst)});
}

std::vector<SubGoal> carry_to(const std::vector<std::string>& e) {
  const auto& obj = e[0];
  const auto& dst = e[1];
  return numbered({make(PK::kHolding, "grasp-" + obj, obj),
                   make(PK::kNear, "approach-" + dst, dst),
                   make(PK::kPlaced, "place-" + obj, obj, dst)});
}

}  // namespace

std::string normalize_instruction(std::string_view instruction) {
  std::string out;
  out.reserve(instruction.size());
  bool pending_space = false;
  for (char raw : instruction) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c) || c == '-') {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::string entity_id_for(std::string_view noun_phrase) {
  const std::string norm = normalize_instruction(noun_phrase);
  const auto pos = norm.rfind(' ');
  return pos == std::string::npos ? norm : norm.substr(pos + 1);
}

TemplateSet TemplateSet::builtin() {
  TemplateSet set;
  set.add({"approach", R"(approach the (.+))", approach});
  set.add({"toggle-then-place", R"((?:turn|switch) on the (.+) and put the (.+) on it)",
           toggle_then_place});
  set.add({"pick-place", R"(pick up the (.+) and place it (?:in|on|into|onto) the (.+))",
           pick_place});
  set.add({"open-then-insert", R"(open the (.+) and put the (.+) (?:in|inside) it)",
           open_then_insert});
  set.add({"multi-object", R"(put the (.+) and then the (.+) in the (.+))", multi_object});
  set.add({"carry-to", R"(carry the (.+) to the (.+))", carry_to});
  return set;
}

void TemplateSet::add(InstructionTemplate t) {
  std::regex re("^" + t.pattern + "$");
  templates_.push_back({std::move(t), std::move(re)});
}

const TemplateSet::Compiled& TemplateSet::match(std::string_view instruction,
                                                std::vector<std::string>& entities) const {
  const std::string norm = normalize_instruction(instruction);
  for (const auto& t : templates_) {
    std::smatch m;
    if (std::regex_match(norm, m, t.re)) {
      entities.clear();
      for (std::size_t i = 1; i < m.size(); ++i) entities.push_back(entity_id_for(m[i].str()));
      return t;
    }
  }
  throw UnknownInstruction("no template matches '" + std::string(instruction) + "'");
}

std::vector<SubGoal> TemplateSet::decompose(std::string_view instruction) const {
  std::vector<std::string> entities;
  const auto& t = match(instruction, entities);
  return t.spec.expand(entities);
}

std::string TemplateSet::family_of(std::string_view instruction) const {
  std::vector<std::string> entities;
  return match(instruction, entities).spec.family;
}

std::vector<SubGoal> decompose(std::string_view instruction, const TemplateSet& templates) {
  return templates.decompose(instruction);
}

namespace {

struct EntityRow {
  const char* id;
  EntityKind kind;
  int x;
  int y;
};

TaskSpec build(const TemplateSet& templates, std::string name, std::string instruction, int w,
               int h, Cell gripper, std::initializer_list<EntityRow> rows, int horizon,
               const char* held = nullptr) {
  TaskSpec t;
  t.name = std::move(name);
  t.instruction = std::move(instruction);
  t.layout.width = w;
  t.layout.height = h;
  t.layout.gripper = gripper;
  for (const auto& r : rows) t.layout.entities.push_back({r.id, r.kind, {r.x, r.y}, false});
  if (held != nullptr) t.layout.held = t.layout.find(held);
  t.subgoals = templates.decompose(t.instruction);
  t.family_tag = templates.family_of(t.instruction);
  t.horizon = horizon;
  validate_task(t);
  return t;
}

}  // namespace

std::vector<TaskSpec> builtin_library() {
  const auto templates = TemplateSet::builtin();
  constexpr auto O = EntityKind::kObject;
  constexpr auto T = EntityKind::kToggle;
  constexpr auto C = EntityKind::kContainer;
  constexpr auto S = EntityKind::kSurface;
  std::vector<TaskSpec> lib;
  lib.push_back(build(templates, "approach-stove", "approach the stove", 10, 10, {1, 1},
                      {{"stove", T, 7, 6}}, 60));
  lib.push_back(build(templates, "stove", "turn on the stove and put the moka pot on it", 4, 4,
                      {0, 0}, {{"stove", T, 3, 3}, {"pot", O, 0, 0}}, 60));
  lib.push_back(build(templates, "stove-compact", "turn on the stove and put the moka pot on it",
                      5, 5, {2, 2}, {{"stove", T, 2, 2}, {"pot", O, 2, 3}}, 50));
  lib.push_back(build(templates, "burner-kettle", "turn on the burner and put the kettle on it",
                      8, 8, {1, 1}, {{"burner", T, 6, 2}, {"kettle", O, 2, 6}}, 80));
  lib.push_back(build(templates, "hotplate-pan", "switch on the hotplate and put the pan on it",
                      8, 8, {4, 0}, {{"hotplate", T, 1, 5}, {"pan", O, 6, 6}}, 80));
  lib.push_back(build(templates, "bowl-basket", "pick up the bowl and place it in the basket", 8,
                      8, {0, 0}, {{"bowl", O, 3, 5}, {"basket", C, 7, 1}}, 80));
  lib.push_back(build(templates, "plate-tray", "pick up the plate and place it on the tray", 8, 8,
                      {7, 7}, {{"plate", O, 2, 2}, {"tray", S, 6, 0}}, 80));
  lib.push_back(build(templates, "mug-box", "pick up the mug and place it into the box", 8, 8,
                      {3, 3}, {{"mug", O, 0, 7}, {"box", C, 7, 4}}, 80));
  lib.push_back(build(templates, "drawer-bowl", "open the drawer and put the bowl in it", 8, 8,
                      {0, 4}, {{"drawer", C, 6, 6}, {"bowl", O, 2, 1}}, 80));
  lib.push_back(build(templates, "cabinet-cup", "open the cabinet and put the cup inside it", 8, 8,
                      {4, 4}, {{"cabinet", C, 0, 7}, {"cup", O, 7, 0}}, 80));
  lib.push_back(build(templates, "microwave-plate",
                      "open the microwave and put the plate in it", 8, 8, {7, 0},
                      {{"microwave", C, 1, 1}, {"plate", O, 5, 6}}, 80));
  lib.push_back(build(templates, "apple-pear-box", "put the apple and then the pear in the box",
                      8, 8, {0, 0}, {{"apple", O, 2, 5}, {"pear", O, 6, 6}, {"box", C, 5, 1}},
                      100));
  lib.push_back(build(templates, "cube-ball-bin", "put the cube and then the ball in the bin", 8,
                      8, {7, 7}, {{"cube", O, 1, 6}, {"ball", O, 3, 0}, {"bin", C, 6, 3}}, 100));
  lib.push_back(build(templates, "soup-sauce-basket",
                      "put the soup and then the sauce in the basket", 8, 8, {4, 0},
                      {{"soup", O, 0, 3}, {"sauce", O, 7, 5}, {"basket", C, 3, 7}}, 100));
  // Starts with the pot in hand and needs a near-perfect run to place it.
  lib.push_back(build(templates, "carry-pot-basket", "carry the pot to the basket", 16, 16,
                      {0, 0}, {{"pot", O, 0, 0}, {"basket", C, 15, 15}}, 34, "pot"));
  return lib;
}

const TaskSpec& find_task(const std::vector<TaskSpec>& tasks, std::string_view name) {
  for (const auto& t : tasks) {
    if (t.name == name) return t;
  }
  throw InvalidTask("unknown task '" + std::string(name) + "'");
}

}  // namespace avla
