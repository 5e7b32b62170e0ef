#include "avla/task_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "avla/errors.hpp"

namespace avla {

using nlohmann::json;

std::vector<TaskSpec> Suite::with_role(std::string_view role) const {
  std::vector<TaskSpec> out;
  for (const auto& e : entries) {
    if (e.role == role) out.push_back(e.task);
  }
  return out;
}

std::vector<TaskSpec> Suite::tasks() const {
  std::vector<TaskSpec> out;
  for (const auto& e : entries) out.push_back(e.task);
  return out;
}

namespace {

Cell read_cell(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2) throw InvalidTask(what + " must be [x, y]");
  return {j[0].get<int>(), j[1].get<int>()};
}

SuiteEntry read_task(const json& j, const TemplateSet& templates) {
  SuiteEntry entry;
  TaskSpec& t = entry.task;
  t.name = j.at("id").get<std::string>();
  t.instruction = j.at("instruction").get<std::string>();
  const auto grid = read_cell(j.at("grid"), "grid");
  t.layout.width = grid.x;
  t.layout.height = grid.y;
  t.layout.gripper = read_cell(j.at("gripper"), "gripper");
  t.horizon = j.at("horizon").get<int>();
  for (const auto& je : j.at("entities")) {
    Entity e;
    e.id = je.at("id").get<std::string>();
    const auto kind_text = je.at("kind").get<std::string>();
    const auto kind = parse_kind(kind_text);
    if (!kind) throw InvalidTask("unknown entity kind '" + kind_text + "'");
    e.kind = *kind;
    e.pos = read_cell(je.at("pos"), "entity position");
    e.toggled = je.value("toggled", false);
    t.layout.entities.push_back(std::move(e));
  }
  if (j.contains("held")) {
    const auto id = j.at("held").get<std::string>();
    t.layout.held = t.layout.find(id);
    if (!t.layout.held) throw InvalidTask("held entity '" + id + "' not in layout");
  }
  t.subgoals = templates.decompose(t.instruction);
  t.family_tag = j.contains("family") ? j.at("family").get<std::string>()
                                      : templates.family_of(t.instruction);
  entry.role = j.value("role", std::string("target"));
  validate_task(t);
  return entry;
}

json write_cell(Cell c) { return json::array({c.x, c.y}); }

}  // namespace

Suite parse_suite(std::string_view json_text, const TemplateSet& templates) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InvalidTask(std::string("suite is not valid JSON: ") + e.what());
  }
  Suite suite;
  try {
    suite.name = doc.value("name", std::string("suite"));
    for (const auto& jt : doc.at("tasks")) suite.entries.push_back(read_task(jt, templates));
  } catch (const json::exception& e) {
    throw InvalidTask(std::string("malformed suite: ") + e.what());
  }
  return suite;
}

Suite load_suite(const std::filesystem::path& path, const TemplateSet& templates) {
  std::ifstream in(path);
  if (!in) throw InvalidTask("cannot open suite file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_suite(buf.str(), templates);
}

std::string dump_suite(const Suite& suite) {
  json doc;
  doc["name"] = suite.name;
  doc["tasks"] = json::array();
  for (const auto& entry : suite.entries) {
    const TaskSpec& t = entry.task;
    json jt;
    jt["id"] = t.name;
    jt["instruction"] = t.instruction;
    jt["family"] = t.family_tag;
    jt["role"] = entry.role;
    jt["grid"] = json::array({t.layout.width, t.layout.height});
    jt["gripper"] = write_cell(t.layout.gripper);
    jt["horizon"] = t.horizon;
    jt["entities"] = json::array();
    for (const auto& e : t.layout.entities) {
      json je{{"id", e.id}, {"kind", std::string(kind_name(e.kind))}, {"pos", write_cell(e.pos)}};
      if (e.toggled) je["toggled"] = true;
      jt["entities"].push_back(je);
    }
    if (t.layout.held) jt["held"] = t.layout.entities[*t.layout.held].id;
    doc["tasks"].push_back(jt);
  }
  return doc.dump(2);
}

}  // namespace avla
