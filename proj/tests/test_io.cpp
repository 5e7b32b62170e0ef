#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "avla/config_io.hpp"
#include "avla/errors.hpp"
#include "avla/metrics.hpp"
#include "avla/params_io.hpp"
#include "avla/task_io.hpp"
#include "helpers.hpp"

namespace avla {
namespace {

TEST(Config, EmptyObjectKeepsDefaults) {
  const auto d = desk_defaults();
  const auto c = parse_config("{}");
  EXPECT_EQ(dump_config(c), dump_config(d));
}

TEST(Config, OverridesNestedKeys) {
  const auto c = parse_config(
      R"({"n_iterations": 7, "grpo": {"learning_rate": 0.25}, "lge": {"lambda": 2.5},
          "memory": {"k": 5, "capacity": 12}, "experiment": {"seeds": 4}})");
  EXPECT_EQ(c.adapt.n_iterations, 7);
  EXPECT_EQ(c.adapt.grpo.learning_rate, 0.25);
  EXPECT_EQ(c.adapt.schedule.lambda, 2.5);
  EXPECT_EQ(c.adapt.retrieval_k, 5u);
  EXPECT_EQ(c.experiment.bank_capacity, 12u);
  EXPECT_EQ(c.experiment.seeds, 4);
  EXPECT_EQ(c.adapt.group_size, desk_defaults().adapt.group_size);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config(R"({"n_iteration": 3})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"grpo": {"lr": 3}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"n_iterations": "many"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"rollouts_per_iteration": 30})"), ConfigError);
  EXPECT_THROW(parse_config("not json"), ConfigError);
  EXPECT_THROW(parse_config(R"({"experiment": {"seeds": 0}})"), ConfigError);
}

TEST(Config, DumpRoundTrips) {
  auto c = desk_defaults();
  c.adapt.seed = 99;
  c.adapt.critic_sigma = 0.0;
  c.experiment.sweep_k = {2, 20};
  const auto text = dump_config(c);
  EXPECT_EQ(dump_config(parse_config(text)), text);
}

TEST(Params, RoundTripBitExact) {
  Rng rng(1);
  PolicyParams p = zero_params(FeatureLayout{});
  for (double& x : p.theta) x = rng.normal() * 1e3;
  p.theta[0] = -0.0;
  p.theta[1] = std::numeric_limits<double>::denorm_min();
  const auto bytes = serialize_params(p);
  const auto q = deserialize_params(bytes, p.version_tag);
  EXPECT_EQ(serialize_params(q), bytes);
  EXPECT_EQ(q.version_tag, p.version_tag);
  ASSERT_EQ(q.theta.size(), p.theta.size());
  EXPECT_EQ(0, std::memcmp(q.theta.data(), p.theta.data(), p.theta.size() * sizeof(double)));
}

TEST(Params, CorruptionAndVersionChecks) {
  const PolicyParams p = hint_following_prior(FeatureLayout{}, 4.0);
  const auto bytes = serialize_params(p);
  EXPECT_THROW(deserialize_params(bytes, std::string_view("linear-softmax/v1")), VersionMismatch);
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 1;
  EXPECT_THROW(deserialize_params(flipped), CorruptBank);
  const std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 9);
  EXPECT_THROW(deserialize_params(cut), CorruptBank);
  EXPECT_THROW(deserialize_params(std::vector<std::uint8_t>{1, 2, 3}), CorruptBank);
}

TEST(Params, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "avla_params_test.bin";
  const PolicyParams p = hint_following_prior(FeatureLayout{}, 2.0);
  save_params(p, path);
  EXPECT_EQ(load_params(path), p);
  std::filesystem::remove(path);
  EXPECT_THROW(load_params(path), CorruptBank);
}

TEST(Metrics, CsvColumnsAreStable) {
  IterationRecord r;
  r.iteration = 3;
  r.rollout_count = 96;
  r.mean_reward = 0.5;
  r.eval_success_rate = 0.25;
  r.eval_progress = 0.75;
  r.capabilities = {0.1, 0.2};
  r.weights = {0.9, 0.8};
  r.suggestion_probability = 0.8;
  r.suggestion_coverage = 0.125;
  EXPECT_EQ(iteration_csv_header(),
            "iteration,rollout_count,mean_reward,eval_success_rate,eval_progress,"
            "suggestion_probability,suggestion_coverage,update_skipped,c_hat,weights");
  EXPECT_EQ(iteration_csv_row(r), "3,96,0.5,0.25,0.75,0.8,0.125,0,0.1;0.2,0.9;0.8");
  r.eval_success_rate.reset();
  r.eval_progress.reset();
  r.update_skipped = true;
  EXPECT_EQ(iteration_csv_row(r), "3,96,0.5,,,0.8,0.125,1,0.1;0.2,0.9;0.8");

  std::ostringstream out;
  IterationCsvWriter w(out, "seed");
  w.write(r, "4");
  EXPECT_EQ(out.str(), "seed," + iteration_csv_header() + "\n4," + iteration_csv_row(r) + "\n");
}

TEST(Metrics, NumbersRoundTripShortest) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.3333333333333333");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

constexpr const char* kSuite = R"({
  "name": "mini",
  "tasks": [
    {"id": "kettle", "role": "prime", "instruction": "turn on the burner and put the kettle on it",
     "grid": [6, 6], "gripper": [0, 0], "horizon": 40,
     "entities": [{"id": "burner", "kind": "toggle", "pos": [4, 1]}, {"id": "kettle", "kind": "object", "pos": [1, 4]}]},
    {"id": "drawer", "instruction": "open the drawer and put the bowl in it", "family": "custom",
     "grid": [5, 4], "gripper": [2, 0], "horizon": 30, "held": "bowl",
     "entities": [{"id": "drawer", "kind": "container", "pos": [4, 3], "toggled": true},
                  {"id": "bowl", "kind": "object", "pos": [2, 0]}]}
  ]
})";

TEST(Suite, ParsesEntriesAndRoles) {
  const auto suite = parse_suite(kSuite, TemplateSet::builtin());
  EXPECT_EQ(suite.name, "mini");
  ASSERT_EQ(suite.entries.size(), 2u);
  EXPECT_EQ(suite.with_role("prime").size(), 1u);
  EXPECT_EQ(suite.with_role("target").size(), 1u);
  const TaskSpec& k = suite.entries[0].task;
  EXPECT_EQ(k.subgoals, TemplateSet::builtin().decompose(k.instruction));
  EXPECT_EQ(k.horizon, 40);
  const TaskSpec& d = suite.entries[1].task;
  EXPECT_EQ(d.family_tag, "custom");
  EXPECT_EQ(d.layout.width, 5);
  EXPECT_EQ(d.layout.height, 4);
  ASSERT_TRUE(d.layout.held.has_value());
  EXPECT_EQ(d.layout.entities[*d.layout.held].id, "bowl");
  EXPECT_TRUE(d.layout.entities[0].toggled);
}

TEST(Suite, DumpRoundTrips) {
  const auto suite = parse_suite(kSuite, TemplateSet::builtin());
  const auto again = parse_suite(dump_suite(suite), TemplateSet::builtin());
  ASSERT_EQ(again.entries.size(), suite.entries.size());
  for (std::size_t i = 0; i < suite.entries.size(); ++i) {
    const auto& a = suite.entries[i];
    const auto& b = again.entries[i];
    EXPECT_EQ(a.role, b.role);
    EXPECT_EQ(a.task.name, b.task.name);
    EXPECT_EQ(a.task.layout, b.task.layout);
    EXPECT_EQ(a.task.subgoals, b.task.subgoals);
    EXPECT_EQ(a.task.horizon, b.task.horizon);
    EXPECT_EQ(a.task.family_tag, b.task.family_tag);
  }
  EXPECT_EQ(dump_suite(again), dump_suite(suite));
}

TEST(Suite, RejectsMalformedInput) {
  const auto& tpl = TemplateSet::builtin();
  EXPECT_THROW(parse_suite("{", tpl), InvalidTask);
  EXPECT_THROW(parse_suite(R"({"tasks": [{"id": "x"}]})", tpl), InvalidTask);
  EXPECT_THROW(parse_suite(R"({"tasks": [{"id": "x", "instruction": "approach the stove",
      "grid": [4, 4], "gripper": [0, 0], "horizon": 10,
      "entities": [{"id": "stove", "kind": "lamp", "pos": [1, 1]}]}]})", tpl), InvalidTask);
  EXPECT_THROW(parse_suite(R"({"tasks": [{"id": "x", "instruction": "approach the stove",
      "grid": [4, 4], "gripper": [0, 0], "horizon": 10,
      "entities": [{"id": "stove", "kind": "toggle", "pos": [9, 1]}]}]})", tpl), InvalidTask);
  EXPECT_THROW(parse_suite(R"({"tasks": [{"id": "x", "instruction": "dance a little",
      "grid": [4, 4], "gripper": [0, 0], "horizon": 10, "entities": []}]})", tpl), UnknownInstruction);
  EXPECT_THROW(load_suite("/nonexistent/suite.json", tpl), InvalidTask);
}

}  // namespace
}  // namespace avla
