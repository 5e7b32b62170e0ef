#include <gtest/gtest.h>

#include <cmath>

#include "avla/errors.hpp"
#include "avla/lge.hpp"
#include "avla/memory.hpp"
#include "avla/text_embedding.hpp"
#include "avla/trainer.hpp"
#include "helpers.hpp"

namespace avla {
namespace {

TEST(Lge, ProbabilityExamples) {
  SuggestionSchedule s;
  EXPECT_DOUBLE_EQ(suggestion_probability(s), 0.8);
  s.lambda = 0.0;
  s.r_bar = 5.0;
  EXPECT_DOUBLE_EQ(suggestion_probability(s), 0.8);
  s.lambda = 0.5;
  s.r_bar = 2.0;
  const long double expected = 0.8L * std::exp(-1.0L);
  EXPECT_NEAR(suggestion_probability(s), static_cast<double>(expected), 1e-15);
  EXPECT_NEAR(suggestion_probability(s), 0.2943, 1e-4);
}

TEST(Lge, ProbabilityStrictlyDecreasing) {
  SuggestionSchedule s;
  double prev = suggestion_probability(s);
  for (int i = 1; i <= 200; ++i) {
    s.r_bar = 0.05 * i;
    const double p = suggestion_probability(s);
    EXPECT_LT(p, prev);
    EXPECT_GT(p, 0.0);
    EXPECT_LE(p, s.p_max);
    prev = p;
  }
}

TEST(Lge, RewardAverageExamples) {
  SuggestionSchedule s;
  update_reward_average(s, 0.0, 5);
  EXPECT_EQ(s.r_bar, 0.0);
  update_reward_average(s, 5.0, 5);
  EXPECT_NEAR(s.r_bar, 0.1, 1e-15);
  SuggestionSchedule c;
  for (int i = 0; i < 100; ++i) update_reward_average(c, 1.2, 3);
  EXPECT_NEAR(c.r_bar, 0.4, 1e-3);
}

TEST(Lge, ScheduleValidation) {
  SuggestionSchedule s;
  EXPECT_NO_THROW(validate_schedule(s));
  s.p_max = 0.0;
  EXPECT_THROW(validate_schedule(s), ConfigError);
  s = {};
  s.lambda = -1;
  EXPECT_THROW(validate_schedule(s), ConfigError);
  s = {};
  s.interval = 0;
  EXPECT_THROW(validate_schedule(s), ConfigError);
}

TEST(Lge, OpportunitiesOnlyAtIntervalMultiples) {
  SuggestionSchedule s;
  s.interval = 50;
  Rng rng(1);
  EXPECT_FALSE(should_suggest(s, 17, rng));
  s.p_max = 1.0;
  s.lambda = 0.0;
  for (std::int64_t t = 0; t <= 500; ++t) {
    EXPECT_EQ(should_suggest(s, t, rng), t % 50 == 0) << t;
  }
}

TEST(Lge, OffIntervalStepsDrawNothing) {
  SuggestionSchedule s;
  s.interval = 10;
  Rng a(7), b(7);
  for (std::int64_t t = 1; t < 10; ++t) should_suggest(s, t, a);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Lge, EmpiricalRateMatchesProbability) {
  SuggestionSchedule s;
  s.r_bar = 0.7;
  const double p = suggestion_probability(s);
  Rng rng(3);
  int hits = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) hits += should_suggest(s, 0, rng) ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(hits) / n, p, 0.02);
}

TEST(Lge, NothingToSuggestWhenDone) {
  const TaskSpec& t = test::task("stove-compact");
  WorldState s = t.layout;
  for (Action a : scripted_episode(t)) s = step(s, a);
  EXPECT_EQ(heuristic_hint(s, t), "");
  HeuristicProvider provider(64);
  CapabilityTracker tracker(t.subgoals.size(), 0.9);
  Rng rng(0);
  const auto sug = provider.suggest(s, t, tracker, rng);
  EXPECT_EQ(sug.source, SuggestionSource::kNone);
  for (double x : sug.features) EXPECT_EQ(x, 0.0);
}

TEST(Lge, DirectionalHintOnFreshStoveLayout) {
  const TaskSpec& t = test::task("stove");
  // Gripper (0,0), stove (3,3): equal gaps resolve horizontally.
  EXPECT_EQ(heuristic_hint(t.layout, t), "move right toward stove");
}

TEST(Lge, ManipulationHints) {
  const TaskSpec& t = test::task("stove-compact");
  EXPECT_EQ(heuristic_hint(t.layout, t), "toggle stove");
  WorldState s = step(t.layout, Action::kToggle);
  EXPECT_EQ(heuristic_hint(s, t), "move up toward pot");
  s = step(s, Action::kUp);
  EXPECT_EQ(heuristic_hint(s, t), "grasp pot");
  s = step(s, Action::kGrasp);
  EXPECT_EQ(heuristic_hint(s, t), "move down toward stove");
  s = step(s, Action::kDown);
  EXPECT_EQ(heuristic_hint(s, t), "release pot");
}

TEST(Lge, OrderingHintWhenObjectTakenEarly) {
  const TaskSpec& t = test::task("drawer-bowl");
  WorldState s = t.layout;
  const auto bowl = *s.find("bowl");
  s.gripper = s.entities[bowl].pos;
  s = step(s, Action::kGrasp);
  ASSERT_TRUE(s.held.has_value());
  EXPECT_EQ(heuristic_hint(s, t), "complete approach-drawer before open-drawer");
}

TEST(Lge, HintTextIsDeterministicAndEncodedLikeInstructions) {
  const TaskSpec& t = test::task("bowl-basket");
  const std::string hint = heuristic_hint(t.layout, t);
  EXPECT_EQ(hint, heuristic_hint(t.layout, t));
  const auto a = make_suggestion(hint, SuggestionSource::kHeuristic, 64);
  EXPECT_EQ(a.features, hashed_encoding(hint, 64));
  const auto b = make_suggestion(hint, SuggestionSource::kHeuristic, 64);
  EXPECT_EQ(a.features, b.features);
  const auto e = embed(hint);
  EXPECT_EQ(make_suggestion(hint, SuggestionSource::kHeuristic, kEmbeddingDim).features, e.values);
}

Action follow(const std::string& hint) {
  const auto space = hint.find(' ');
  const std::string verb = hint.substr(0, space);
  if (verb == "move") {
    const auto rest = hint.substr(space + 1);
    return *parse_action(rest.substr(0, rest.find(' ')));
  }
  if (verb == "grasp") return Action::kGrasp;
  if (verb == "toggle") return Action::kToggle;
  // "release <x>" and ordering hints both call for putting the object down.
  return Action::kRelease;
}

TEST(Lge, HeuristicIsSoundFromReachableStates) {
  Rng rng(11);
  for (const auto& t : test::library()) {
    for (int trial = 0; trial < 60; ++trial) {
      WorldState s = test::random_walk(t, static_cast<int>(rng.next_u64() % 40), rng);
      bool done = t.succeeded(s);
      // Random walks may leave tight-horizon tasks unsolvable in time, so
      // the budget is generous rather than the task horizon.
      for (int step_i = 0; step_i < 200 && !done; ++step_i) {
        const std::string hint = heuristic_hint(s, t);
        ASSERT_FALSE(hint.empty()) << t.name;
        s = step(s, follow(hint));
        done = t.succeeded(s);
      }
      EXPECT_TRUE(done) << t.name << " trial " << trial;
    }
  }
}

TEST(Lge, EvaluationNeverSeesSuggestions) {
  // The prior only weights the suggestion block, so evaluation that saw
  // hints would diverge from a zero-parameter policy on the same seed.
  const TaskSpec& t = test::task("stove");
  const FeatureLayout layout{};
  const auto prior = hint_following_prior(layout, 25.0);
  const auto zero = zero_params(layout);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto a = evaluate(prior, t, 20, seed);
    const auto b = evaluate(zero, t, 20, seed);
    EXPECT_EQ(a.success_rate, b.success_rate);
    EXPECT_EQ(a.mean_progress, b.mean_progress);
  }
}

TEST(Lge, RolloutSuggestionsPersistUntilNextOpportunity) {
  const TaskSpec& t = test::task("stove");
  AdaptConfig cfg;
  cfg.schedule.interval = 4;
  SuggestionSchedule sched = cfg.schedule;
  HeuristicProvider provider(cfg.features.suggestion_dim);
  CapabilityTracker tracker(t.subgoals.size(), 0.9);
  Rng rng(5);
  const auto tr = rollout(base_policy(cfg), t, cfg, sched, &provider, tracker, rng);
  ASSERT_EQ(tr.suggestions.size(), tr.length());
  for (std::size_t i = 0; i < tr.length(); ++i) {
    if (i % 4 != 0) {
      // Between opportunities the active hint (or its absence) carries over.
      EXPECT_EQ(tr.suggestions[i].empty(), tr.suggestions[i - 1].empty()) << i;
    }
    const auto& f = tr.features[i].values;
    double mass = 0.0;
    for (std::size_t j = cfg.features.suggestion_offset(); j < f.size(); ++j) mass += std::abs(f[j]);
    EXPECT_EQ(mass > 0.0, !tr.suggestions[i].empty()) << i;
  }
}

}  // namespace
}  // namespace avla
