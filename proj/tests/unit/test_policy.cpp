#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hiper/core/trajectory_io.hpp"
#include "hiper/oracle/checks.hpp"
#include "hiper/oracle/enumerate.hpp"
#include "hiper/oracle/gradient.hpp"
#include "hiper/policy/checkpoint.hpp"
#include "hiper/policy/policy.hpp"

namespace hiper {
namespace {

TEST(Softmax, StableAndNormalized) {
  const std::vector<double> p = softmax(std::vector<double>{1000.0, 1000.0, -1e9});
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  EXPECT_EQ(p[2], 0.0);
  EXPECT_NEAR(log_softmax_at(std::vector<double>{0.0, std::log(3.0)}, 1), std::log(0.75), 1e-15);
}

TEST(SwitchProb, EqualLogits) {
  const PolicyParams p(PolicyShape{3, 2, 4});
  EXPECT_DOUBLE_EQ(switch_prob(p, 1, 1), 0.5);
}

TEST(SwitchProb, LogThree) {
  PolicyParams p(PolicyShape{3, 2, 4});
  p.switch_row(2, 0)[1] = std::log(3.0);
  EXPECT_NEAR(switch_prob(p, 2, 0), 0.75, 1e-15);
}

TEST(SwitchProb, Saturated) {
  PolicyParams p(PolicyShape{3, 2, 4});
  p.switch_row(0, 1)[1] = -1e9;
  EXPECT_LT(switch_prob(p, 0, 1), 1e-300);
}

TEST(SampleTurn, DeterministicHeads) {
  PolicyParams p(PolicyShape{3, 2, 4});
  p.switch_row(1, 0)[1] = 1e9;
  p.subgoal_row(1)[1] = 1e9;
  p.action_row(1, 1)[3] = 1e9;
  const CounterRng rng(5);
  for (int stream = 0; stream < 20; ++stream) {
    const TurnSample s = sample_turn(p, 1, 0, rng, stream, 3);
    EXPECT_EQ(s.q, Switch::kSwitch);
    EXPECT_EQ(s.subgoal, 1);
    EXPECT_EQ(s.action, 3);
    EXPECT_NEAR(*s.behavior.lp_switch + *s.behavior.lp_high + s.behavior.lp_low, 0.0, 1e-12);
  }
}

TEST(SampleTurn, FirstTurnForcesSwitch) {
  PolicyParams p(PolicyShape{3, 2, 4});
  const CounterRng rng(1);
  for (int stream = 0; stream < 50; ++stream) {
    const TurnSample s = sample_turn(p, 0, std::nullopt, rng, stream, 0);
    EXPECT_EQ(s.q, Switch::kSwitch);
    EXPECT_FALSE(s.behavior.lp_switch.has_value());
    EXPECT_TRUE(s.behavior.lp_high.has_value());
  }
}

TEST(SampleTurn, SeededReproducible) {
  const FetchChain env(3, 6);
  const PolicyParams p(policy_shape_for(env, 2));
  const CounterRng a(42), b(42);
  for (int t = 0; t < 30; ++t) {
    const TurnSample x = sample_turn(p, t % 6, t ? std::optional<int>(t % 2) : std::nullopt, a, 9, t);
    const TurnSample y = sample_turn(p, t % 6, t ? std::optional<int>(t % 2) : std::nullopt, b, 9, t);
    EXPECT_EQ(x.q, y.q);
    EXPECT_EQ(x.subgoal, y.subgoal);
    EXPECT_EQ(x.action, y.action);
  }
}

TEST(LogProb, UniformTwoActions) {
  const OneStep env({0.0, 10.0});
  const PolicyParams p(policy_shape_for(env, 2));
  TurnRecord turn;
  turn.q = Switch::kSwitch;
  turn.action = 1;
  const HeadLogProbs lp = log_prob(p, turn);
  EXPECT_DOUBLE_EQ(lp.lp_low, std::log(0.5));
  EXPECT_FALSE(lp.lp_switch.has_value());
  EXPECT_DOUBLE_EQ(*lp.lp_high, std::log(0.5));
}

TEST(LogProb, KeepTurnHasNoHighTerm) {
  const PolicyParams p(PolicyShape{3, 2, 4});
  TurnRecord turn;
  turn.t = 2;
  turn.prev_subgoal = 1;
  turn.subgoal = 1;
  turn.q = Switch::kKeep;
  const HeadLogProbs lp = log_prob(p, turn);
  EXPECT_FALSE(lp.lp_high.has_value());
  EXPECT_DOUBLE_EQ(*lp.lp_switch, std::log(0.5));
}

TEST(LogProb, SumOfHeadsMatchesEnumeration) {
  const FetchChain env(3, 4);
  std::mt19937_64 eng(3);
  const PolicyParams p = random_params(eng, policy_shape_for(env, 2));
  double total = 0.0;
  int checked = 0;
  for_each_trajectory(env, p, 4, [&](const Trajectory& traj, double prob) {
    double lp = 0.0;
    for (const TurnRecord& t : traj.turns) lp += log_prob(p, t).total();
    EXPECT_NEAR(lp, std::log(prob), 1e-10);
    total += prob;
    ++checked;
  });
  EXPECT_GT(checked, 100);
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(GradLogProb, TwoActionRow) {
  const OneStep env({0.0, 10.0});
  const PolicyParams p(policy_shape_for(env, 2));
  TurnRecord turn;
  turn.subgoal = 0;
  turn.action = 0;
  const GradTables g = grad_log_prob(p, turn);
  EXPECT_DOUBLE_EQ(g.action_row(0, 0)[0], 0.5);
  EXPECT_DOUBLE_EQ(g.action_row(0, 0)[1], -0.5);
  EXPECT_DOUBLE_EQ(g.action_row(0, 1)[0], 0.0);
}

TEST(GradLogProb, DeterministicChosenHead) {
  const OneStep env({0.0, 10.0});
  PolicyParams p(policy_shape_for(env, 1));
  p.action_row(0, 0)[0] = 40.0;
  TurnRecord turn;
  const GradTables g = grad_log_prob(p, turn);
  EXPECT_LT(g.max_abs(), 1e-15);
}

TEST(GradLogProb, MatchesFiniteDifferences) {
  const FetchChain env(3, 6);
  std::mt19937_64 eng(8);
  const PolicyParams p = random_params(eng, policy_shape_for(env, 2), 2.0);
  const CounterRng rng(8);
  for (int ep = 0; ep < 5; ++ep) {
    const Trajectory traj = rollout(env, p, 6, rng, ep, 0.0);
    for (const TurnRecord& turn : traj.turns) {
      const GradTables g = grad_log_prob(p, turn);
      const GradTables fd = finite_difference_gradient(
          [&](const PolicyParams& q) { return log_prob(q, turn).total(); }, p);
      for (std::size_t i = 0; i < g.values().size(); ++i) {
        EXPECT_TRUE(close_relative(g.values()[i], fd.values()[i]))
            << i << ": " << g.values()[i] << " vs " << fd.values()[i];
      }
    }
  }
}

TEST(Rollout, HorizonOne) {
  const FetchChain env(3, 6);
  const PolicyParams p(policy_shape_for(env, 2));
  const Trajectory traj = rollout(env, p, 1, CounterRng(1), 0, 0.3);
  ASSERT_EQ(traj.length(), 1);
  EXPECT_EQ(traj.turns[0].q, Switch::kSwitch);
  EXPECT_TRUE(traj.truncated);
  EXPECT_TRUE(traj.final_state.has_value());
}

TEST(Rollout, HandCodedOptimum) {
  const FetchChain env(3, 8);
  const PolicyParams p = staged_fetch_params(env, 2, 30.0);
  const Trajectory traj = greedy_rollout(env, p, 8, 0.0);
  double ret = 0.0;
  for (const TurnRecord& t : traj.turns) ret += t.raw_reward;
  EXPECT_EQ(ret, 10.0);
  EXPECT_TRUE(traj.terminated());
  // L-1 steps out, PICKUP, L-1 back, DROP.
  EXPECT_EQ(traj.length(), 6);
  const Trajectory sampled = rollout(env, p, 8, CounterRng(2), 0, 0.0);
  EXPECT_TRUE(sampled.terminated());
}

TEST(Rollout, ByteIdenticalUnderSeed) {
  const FetchChain env(3, 8);
  std::mt19937_64 eng(4);
  const PolicyParams p = random_params(eng, policy_shape_for(env, 2));
  for (int ep = 0; ep < 10; ++ep) {
    EXPECT_EQ(to_jsonl(rollout(env, p, 8, CounterRng(77), ep, 0.3)),
              to_jsonl(rollout(env, p, 8, CounterRng(77), ep, 0.3)));
  }
  EXPECT_NE(to_jsonl(rollout(env, p, 8, CounterRng(77), 0, 0.3)),
            to_jsonl(rollout(env, p, 8, CounterRng(78), 0, 0.3)));
}

TEST(Rollout, KeepPenaltyFolded) {
  const FetchChain env(3, 8);
  const PolicyParams p(policy_shape_for(env, 2));
  const Trajectory traj = rollout(env, p, 8, CounterRng(3), 1, 0.3);
  for (const TurnRecord& t : traj.turns) {
    EXPECT_DOUBLE_EQ(t.reward, t.raw_reward - (t.switched() ? 0.0 : 0.3));
  }
}

TEST(Checkpoint, RoundTripExact) {
  std::mt19937_64 eng(5);
  const PolicyParams p = random_params(eng, PolicyShape{11, 2, 4});
  std::stringstream ss;
  save_policy(ss, p);
  const PolicyParams q = load_policy(ss);
  EXPECT_EQ(q.shape(), p.shape());
  for (std::size_t i = 0; i < p.values().size(); ++i) EXPECT_EQ(p.values()[i], q.values()[i]);
}

TEST(Checkpoint, TruncatedInputRejected) {
  std::mt19937_64 eng(5);
  std::stringstream ss;
  save_policy(ss, random_params(eng, PolicyShape{3, 2, 4}));
  std::string text = ss.str();
  text.resize(text.size() / 2);
  std::stringstream in(text);
  EXPECT_ANY_THROW(load_policy(in));
}

}  // namespace
}  // namespace hiper
