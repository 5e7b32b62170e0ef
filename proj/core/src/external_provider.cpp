#include "avla/external_provider.hpp"

#include <httplib.h>

#include <json.hpp>

#include "avla/errors.hpp"

namespace avla {

using nlohmann::json;

namespace {

json observation_to_json(const WorldState& s) {
  json entities = json::array();
  for (const auto& e : s.entities) {
    entities.push_back({{"id", e.id},
                        {"kind", std::string(kind_name(e.kind))},
                        {"pos", json::array({e.pos.x, e.pos.y})},
                        {"toggled", e.toggled}});
  }
  json held = nullptr;
  if (s.held) held = s.entities[*s.held].id;
  return {{"width", s.width},
          {"height", s.height},
          {"gripper", json::array({s.gripper.x, s.gripper.y})},
          {"held", held},
          {"step_count", s.step_count},
          {"entities", entities}};
}

WorldState observation_from_json(const json& j) {
  WorldState s;
  s.width = j.at("width").get<int>();
  s.height = j.at("height").get<int>();
  s.gripper = {j.at("gripper").at(0).get<int>(), j.at("gripper").at(1).get<int>()};
  s.step_count = j.at("step_count").get<std::int64_t>();
  for (const auto& je : j.at("entities")) {
    Entity e;
    e.id = je.at("id").get<std::string>();
    const auto kind = parse_kind(je.at("kind").get<std::string>());
    if (!kind) throw ProviderUnavailable("unknown entity kind in observation");
    e.kind = *kind;
    e.pos = {je.at("pos").at(0).get<int>(), je.at("pos").at(1).get<int>()};
    e.toggled = je.at("toggled").get<bool>();
    s.entities.push_back(std::move(e));
  }
  if (!j.at("held").is_null()) {
    s.held = s.find(j.at("held").get<std::string>());
    if (!s.held) throw ProviderUnavailable("held entity not in observation");
  }
  return s;
}

}  // namespace

SuggestionRequest make_request(const WorldState& obs, const TaskSpec& task) {
  SuggestionRequest req;
  req.instruction = task.instruction;
  req.observation = obs;
  const auto done = completion_flags(obs, task);
  for (std::size_t k = 0; k < done.size(); ++k) {
    if (!done[k]) req.unsatisfied_subgoals.push_back(task.subgoals[k].description);
  }
  return req;
}

std::string encode_request(const SuggestionRequest& req) {
  json j{{"instruction", req.instruction},
         {"observation", observation_to_json(req.observation)},
         {"unsatisfied_subgoals", req.unsatisfied_subgoals}};
  return j.dump();
}

SuggestionRequest decode_request(std::string_view body) {
  try {
    const json j = json::parse(body);
    SuggestionRequest req;
    req.instruction = j.at("instruction").get<std::string>();
    req.observation = observation_from_json(j.at("observation"));
    req.unsatisfied_subgoals = j.at("unsatisfied_subgoals").get<std::vector<std::string>>();
    return req;
  } catch (const json::exception& e) {
    throw ProviderUnavailable(std::string("malformed request: ") + e.what());
  }
}

std::string encode_response(const SuggestionResponse& resp) {
  return json{{"suggestion", resp.suggestion}}.dump();
}

SuggestionResponse decode_response(std::string_view body) {
  try {
    const json j = json::parse(body);
    return {j.at("suggestion").get<std::string>()};
  } catch (const json::exception& e) {
    throw ProviderUnavailable(std::string("malformed response: ") + e.what());
  }
}

ExternalProvider::ExternalProvider(Options options, std::size_t dim)
    : options_(std::move(options)), dim_(dim), fallback_(dim) {}

SuggestionResponse ExternalProvider::request(const SuggestionRequest& req) const {
  httplib::Client client(options_.host, options_.port);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto micros =
      std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  auto res = client.Post(options_.path, encode_request(req), "application/json");
  if (!res) throw ProviderUnavailable("request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw ProviderUnavailable("service answered HTTP " + std::to_string(res->status));
  }
  return decode_response(res->body);
}

Suggestion ExternalProvider::suggest(const WorldState& obs, const TaskSpec& task,
                                     const CapabilityTracker& tracker, Rng& rng) {
  try {
    auto resp = request(make_request(obs, task));
    return make_suggestion(std::move(resp.suggestion), SuggestionSource::kExternal, dim_);
  } catch (const ProviderUnavailable&) {
    ++fallbacks_;
    return fallback_.suggest(obs, task, tracker, rng);
  }
}

}  // namespace avla
