#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "avla/ars.hpp"
#include "avla/config_io.hpp"
#include "avla/grpo.hpp"
#include "avla/lge.hpp"
#include "avla/memory.hpp"
#include "avla/templates.hpp"
#include "avla/trainer.hpp"

namespace {

using namespace avla;

const TaskSpec& bench_task() {
  static const auto lib = builtin_library();
  return find_task(lib, "drawer-bowl");
}

std::vector<Trajectory> sample_rollouts(int n, std::uint64_t seed) {
  const AdaptConfig c = desk_defaults().adapt;
  const TaskSpec& t = bench_task();
  const auto params = base_policy(c);
  CapabilityTracker tracker(t.subgoals.size(), c.alpha);
  HeuristicProvider provider(c.features.suggestion_dim);
  Rng rng(seed);
  std::vector<Trajectory> out;
  for (int i = 0; i < n; ++i) out.push_back(rollout(params, t, c, c.schedule, &provider, tracker, rng));
  return out;
}

MemoryBank filled_bank(std::size_t n) {
  const FeatureLayout layout{};
  MemoryBank bank(layout.fingerprint(), n);
  Rng rng(5);
  for (std::size_t i = 0; i < n; ++i) {
    PolicyParams p = zero_params(layout);
    for (double& x : p.theta) x = rng.normal();
    bank.insert(make_entry("stack block " + std::to_string(i) + " on the shelf", p, 0.9, 40, 3,
                           static_cast<std::int64_t>(i)));
  }
  return bank;
}

void BM_WorldStep(benchmark::State& state) {
  WorldState s = bench_task().layout;
  std::size_t i = 0;
  for (auto _ : state) {
    s = step(s, kAllActions[i++ % kNumActions]);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_WorldStep);

void BM_PolicyForward(benchmark::State& state) {
  const AdaptConfig c = desk_defaults().adapt;
  const TaskSpec& t = bench_task();
  const auto params = base_policy(c);
  const auto sug = make_suggestion(heuristic_hint(t.layout, t), SuggestionSource::kHeuristic,
                                   c.features.suggestion_dim);
  for (auto _ : state) {
    const auto f = featurize(t.layout, t, sug, c.features);
    benchmark::DoNotOptimize(action_distribution(params, f, 1.0));
  }
}
BENCHMARK(BM_PolicyForward);

void BM_Rollout(benchmark::State& state) {
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample_rollouts(1, seed++));
}
BENCHMARK(BM_Rollout)->Unit(benchmark::kMicrosecond);

void BM_ComputeReward(benchmark::State& state) {
  const auto trajs = sample_rollouts(8, 2);
  const TaskSpec& t = bench_task();
  CapabilityTracker tracker(t.subgoals.size(), 0.9);
  NoisyOracleCritic critic(0.05);
  Rng rng(3);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_reward(trajs[i++ % trajs.size()], t.subgoals, tracker, critic, rng));
  }
}
BENCHMARK(BM_ComputeReward);

void BM_GrpoUpdate(benchmark::State& state) {
  const AdaptConfig c = desk_defaults().adapt;
  std::vector<RolloutGroup> groups(4);
  Rng rng(4);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    groups[g].trajectories = sample_rollouts(8, 10 + g);
    for (int i = 0; i < 8; ++i) groups[g].rewards.push_back(rng.uniform());
  }
  const auto params = base_policy(c);
  for (auto _ : state) benchmark::DoNotOptimize(update(params, groups, c.grpo));
}
BENCHMARK(BM_GrpoUpdate)->Unit(benchmark::kMicrosecond);

void BM_Retrieve(benchmark::State& state) {
  const auto bank = filled_bank(static_cast<std::size_t>(state.range(0)));
  const auto q = embed("stack the red block on the shelf");
  for (auto _ : state) benchmark::DoNotOptimize(bank.retrieve(q, 3));
}
BENCHMARK(BM_Retrieve)->Arg(10)->Arg(100)->Arg(1000);

void BM_WarmStart(benchmark::State& state) {
  const auto bank = filled_bank(100);
  const auto base = zero_params(FeatureLayout{});
  for (auto _ : state) benchmark::DoNotOptimize(warm_start(bank, "stack the red block on the shelf", base, 3, 0.1));
}
BENCHMARK(BM_WarmStart);

void BM_SerializeBank(benchmark::State& state) {
  const auto bank = filled_bank(100);
  for (auto _ : state) benchmark::DoNotOptimize(serialize_bank(bank));
}
BENCHMARK(BM_SerializeBank)->Unit(benchmark::kMicrosecond);

void BM_DeserializeBank(benchmark::State& state) {
  const auto bytes = serialize_bank(filled_bank(100));
  for (auto _ : state) benchmark::DoNotOptimize(deserialize_bank(bytes));
}
BENCHMARK(BM_DeserializeBank)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
