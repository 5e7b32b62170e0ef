#include "avla/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "avla/errors.hpp"

namespace avla {

using nlohmann::json;

namespace {

// Reads known keys from an object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + " must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + name_ + key + "'");
    }
  }
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + name_ + key + "': " + e.what());
    }
  }
  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig desk_defaults() {
  RunConfig c;
  c.adapt.grpo.learning_rate = 10.0;
  c.adapt.schedule.interval = 4;
  return c;
}

RunConfig parse_config(std::string_view json_text, const RunConfig& defaults) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c = defaults;
  AdaptConfig& a = c.adapt;
  {
    Section top(doc, "");
    top.get("n_iterations", a.n_iterations);
    top.get("rollouts_per_iteration", a.rollouts_per_iteration);
    top.get("group_size", a.group_size);
    top.get("horizon", a.horizon);
    top.get("success_threshold", a.success_threshold);
    top.get("early_stop", a.early_stop);
    top.get("eval_every", a.eval_every);
    top.get("eval_episodes", a.eval_episodes);
    top.get("eval_greedy", a.eval_greedy);
    top.get("seed", a.seed);
    top.get("use_ars", a.use_ars);
    top.get("use_lge", a.use_lge);
    top.get("use_memory", a.use_memory);
    top.get("uniform_weights", a.uniform_weights);
    top.get("critic_sigma", a.critic_sigma);
    if (const json* j = top.child("ars")) {
      Section s(*j, "ars.");
      s.get("alpha", a.alpha);
      s.get("c_init", a.c_init);
    }
    if (const json* j = top.child("policy")) {
      Section s(*j, "policy.");
      s.get("explore_temperature", a.explore_temperature);
      s.get("eval_temperature", a.eval_temperature);
      s.get("prior_gain", a.prior_gain);
      s.get("max_entities", a.features.max_entities);
      s.get("max_subgoals", a.features.max_subgoals);
      s.get("suggestion_dim", a.features.suggestion_dim);
    }
    if (const json* j = top.child("grpo")) {
      Section s(*j, "grpo.");
      s.get("learning_rate", a.grpo.learning_rate);
      s.get("clip_epsilon", a.grpo.clip_epsilon);
      s.get("epsilon_std", a.grpo.epsilon_std);
      s.get("epochs_per_batch", a.grpo.epochs_per_batch);
    }
    if (const json* j = top.child("lge")) {
      Section s(*j, "lge.");
      s.get("p_max", a.schedule.p_max);
      s.get("lambda", a.schedule.lambda);
      s.get("beta", a.schedule.beta);
      s.get("interval", a.schedule.interval);
    }
    if (const json* j = top.child("memory")) {
      Section s(*j, "memory.");
      s.get("k", a.retrieval_k);
      s.get("tau", a.retrieval_tau);
      s.get("insert_threshold", a.memory_insert_threshold);
      s.get("capacity", c.experiment.bank_capacity);
    }
    if (const json* j = top.child("experiment")) {
      Section s(*j, "experiment.");
      s.get("seeds", c.experiment.seeds);
      s.get("base_seed", c.experiment.base_seed);
      s.get("prime_iterations", c.experiment.prime_iterations);
      s.get("target_iterations", c.experiment.target_iterations);
      s.get("sweep_tau", c.experiment.sweep_tau);
      s.get("sweep_k", c.experiment.sweep_k);
      s.get("sweep_capacity", c.experiment.sweep_capacity);
    }
  }
  validate_config(a);
  if (c.experiment.seeds < 1) throw ConfigError("experiment.seeds must be positive");
  if (c.experiment.bank_capacity < 1) throw ConfigError("memory.capacity must be positive");
  if (c.experiment.prime_iterations < 0 || c.experiment.target_iterations < 0) {
    throw ConfigError("experiment iteration budgets must be non-negative");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const RunConfig& defaults) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), defaults);
}

std::string dump_config(const RunConfig& c) {
  const AdaptConfig& a = c.adapt;
  json doc = {
      {"n_iterations", a.n_iterations},
      {"rollouts_per_iteration", a.rollouts_per_iteration},
      {"group_size", a.group_size},
      {"horizon", a.horizon},
      {"success_threshold", a.success_threshold},
      {"early_stop", a.early_stop},
      {"eval_every", a.eval_every},
      {"eval_episodes", a.eval_episodes},
      {"eval_greedy", a.eval_greedy},
      {"seed", a.seed},
      {"use_ars", a.use_ars},
      {"use_lge", a.use_lge},
      {"use_memory", a.use_memory},
      {"uniform_weights", a.uniform_weights},
      {"critic_sigma", a.critic_sigma},
      {"ars", {{"alpha", a.alpha}, {"c_init", a.c_init}}},
      {"policy",
       {{"explore_temperature", a.explore_temperature},
        {"eval_temperature", a.eval_temperature},
        {"prior_gain", a.prior_gain},
        {"max_entities", a.features.max_entities},
        {"max_subgoals", a.features.max_subgoals},
        {"suggestion_dim", a.features.suggestion_dim}}},
      {"grpo",
       {{"learning_rate", a.grpo.learning_rate},
        {"clip_epsilon", a.grpo.clip_epsilon},
        {"epsilon_std", a.grpo.epsilon_std},
        {"epochs_per_batch", a.grpo.epochs_per_batch}}},
      {"lge",
       {{"p_max", a.schedule.p_max},
        {"lambda", a.schedule.lambda},
        {"beta", a.schedule.beta},
        {"interval", a.schedule.interval}}},
      {"memory",
       {{"k", a.retrieval_k},
        {"tau", a.retrieval_tau},
        {"insert_threshold", a.memory_insert_threshold},
        {"capacity", c.experiment.bank_capacity}}},
      {"experiment",
       {{"seeds", c.experiment.seeds},
        {"base_seed", c.experiment.base_seed},
        {"prime_iterations", c.experiment.prime_iterations},
        {"target_iterations", c.experiment.target_iterations},
        {"sweep_tau", c.experiment.sweep_tau},
        {"sweep_k", c.experiment.sweep_k},
        {"sweep_capacity", c.experiment.sweep_capacity}}},
  };
  return doc.dump(2) + "\n";
}

}  // namespace avla
