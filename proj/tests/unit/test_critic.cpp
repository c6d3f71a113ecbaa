#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "hiper/critic/critic.hpp"
#include "hiper/oracle/checks.hpp"
#include "hiper/oracle/enumerate.hpp"
#include "hiper/policy/policy.hpp"

namespace hiper {
namespace {

using test::make_traj;

// Turn t in state t, subgoal ids 0, 1, ... per segment.
ValueTables tables_for(int states, int subgoals = 4) { return ValueTables(states, subgoals); }

TEST(VNext, InteriorUsesLowOfSameSubgoal) {
  const Trajectory traj = make_traj({1, 0, 1}, {0, 0, 0});
  ValueTables v = tables_for(4);
  v.low(1, 0, 0) = 2.5;
  v.high(1, 0) = -7.0;
  EXPECT_EQ(v_next(traj, v, 0), 2.5);
}

TEST(VNext, SegmentEndTerminalIsZero) {
  const Trajectory traj = make_traj({1, 0, 1}, {0, 0, 10});
  ValueTables v = tables_for(4);
  v.high(3, 0) = 5.0;
  v.low(3, 1, 0) = 5.0;
  EXPECT_EQ(v_next(traj, v, 2), 0.0);
}

TEST(VNext, SegmentEndUsesHighAtBoundary) {
  const Trajectory traj = make_traj({1, 0, 1}, {0, 0, 0});
  ValueTables v = tables_for(4);
  v.high(2, 0) = 3.0;
  v.low(2, 0, 0) = -1.0;
  EXPECT_EQ(v_next(traj, v, 1), 3.0);
}

TEST(VNext, TruncationBootstrapsHighAtFinalState) {
  const Trajectory traj = make_traj({1, 0}, {0, 0}, false, {}, 3);
  ValueTables v = tables_for(4);
  v.high(3, 0) = 1.25;
  EXPECT_EQ(v_next(traj, v, 1), 1.25);
}

TEST(HighTargets, MacroStepBootstrap) {
  const Trajectory traj = make_traj({1, 1}, {2, 0});
  ValueTables v = tables_for(4);
  v.high(1, 0) = 4.0;
  const std::vector<double> y = high_targets(traj, v, 0.5);
  EXPECT_DOUBLE_EQ(y[0], 4.0);
}

TEST(HighTargets, LastTerminalSegmentIsMacroReward) {
  const Trajectory traj = make_traj({1, 1, 0}, {0, 1, 4});
  ValueTables v = tables_for(4);
  v.high(3, 0) = 100.0;
  const std::vector<double> y = high_targets(traj, v, 0.5);
  EXPECT_DOUBLE_EQ(y[1], 1.0 + 0.5 * 4.0);
}

TEST(HighTargets, UnitSegmentsReduceToOneStep) {
  const Trajectory traj = make_traj({1, 1, 1, 1}, {1, -2, 0.5, 3}, false, {}, 4);
  ValueTables v = tables_for(5);
  for (int s = 0; s < 5; ++s) v.high(s, 0) = 0.3 * s - 1.0;
  const std::vector<double> y = high_targets(traj, v, 1.0);
  ASSERT_EQ(y.size(), 4u);
  for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(y[k], traj.turns[k].reward + v.high(k + 1, 0));
}

TEST(LowTargets, ZeroEverything) {
  const Trajectory traj = make_traj({1, 0, 1}, {0, 0, 0}, false, {}, 3);
  for (double y : low_targets(traj, tables_for(4), 0.9)) EXPECT_EQ(y, 0.0);
}

TEST(LowTargets, TerminalTurnIsReward) {
  const Trajectory traj = make_traj({1, 0}, {0, 7});
  ValueTables v = tables_for(3);
  v.high(2, 0) = 9.0;
  EXPECT_EQ(low_targets(traj, v, 0.9)[1], 7.0);
}

TEST(LowTargets, InteriorTurn) {
  const Trajectory traj = make_traj({1, 0}, {1, 0});
  ValueTables v = tables_for(3);
  v.low(1, 0, 0) = 2.0;
  EXPECT_DOUBLE_EQ(low_targets(traj, v, 0.9)[0], 2.8);
}

TEST(FlatTargets, ReturnsWithTruncationBootstrap) {
  const Trajectory traj = make_traj({1, 0, 1}, {1, 2, 3}, false, {}, 3);
  FlatValueTable f(4);
  f.value(3, 0) = 10.0;
  const std::vector<double> y = flat_targets(traj, f, 0.5);
  EXPECT_DOUBLE_EQ(y[2], 3.0 + 0.5 * 10.0);
  EXPECT_DOUBLE_EQ(y[1], 2.0 + 0.5 * y[2]);
  EXPECT_DOUBLE_EQ(y[0], 1.0 + 0.5 * y[1]);
}

CriticDataset one_cell(double y) {
  CriticDataset data(2, 1, 1, 1.0);
  data.add(make_traj({1}, {y}, true, {0}));
  return data;
}

TEST(Fit, TargetsEqualTablesUnchanged) {
  const CriticDataset data = one_cell(3.0);
  ValueTables v = data.make_tables();
  v.high(0, 0) = 3.0;
  v.low(0, 0, 0) = 3.0;
  const CriticFit fit = fit_critic(v, data, {0.1, 10, false});
  EXPECT_EQ(fit.tables.high(0, 0), 3.0);
  EXPECT_EQ(fit.tables.low(0, 0, 0), 3.0);
  EXPECT_EQ(fit.high_mse.back(), 0.0);
}

TEST(Fit, HalfStepJumpsToTarget) {
  const CriticFit fit = fit_critic(one_cell(5.0).make_tables(), one_cell(5.0), {0.5, 1, false});
  EXPECT_DOUBLE_EQ(fit.tables.high(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(fit.tables.low(0, 0, 0), 5.0);
}

TEST(Fit, UnitStepReflectsAcrossTarget) {
  // v <- v - 2 (v - y) maps 0 to 2y and back: the full gradient step at lr = 1
  // overshoots rather than converging.
  const CriticDataset data = one_cell(5.0);
  EXPECT_DOUBLE_EQ(fit_critic(data.make_tables(), data, {1.0, 1, false}).tables.high(0, 0), 10.0);
  EXPECT_DOUBLE_EQ(fit_critic(data.make_tables(), data, {1.0, 2, false}).tables.high(0, 0), 0.0);
}

TEST(Fit, SmallStepsConvergeGeometrically) {
  const CriticDataset data = one_cell(5.0);
  const CriticFit fit = fit_critic(data.make_tables(), data, {0.1, 60, false});
  EXPECT_NEAR(fit.tables.high(0, 0), 5.0, 5.0 * std::pow(0.8, 60) + 1e-12);
  for (std::size_t i = 1; i < fit.high_mse.size(); ++i) {
    EXPECT_LE(fit.high_mse[i], fit.high_mse[i - 1]);
  }
}

TEST(Fit, WeightedMeanTarget) {
  CriticDataset data(2, 1, 1, 1.0);
  data.add(make_traj({1}, {2.0}, true, {0}), 3.0);
  data.add(make_traj({1}, {6.0}, true, {0}), 1.0);
  const CriticFit fit = fit_critic(data.make_tables(), data, {0.5, 1, false});
  EXPECT_DOUBLE_EQ(fit.tables.high(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(data.total_weight(), 4.0);
}

TEST(Fit, IdenticalSamplesCoalesce) {
  CriticDataset data(2, 1, 1, 1.0);
  for (int i = 0; i < 5; ++i) data.add(make_traj({1}, {2.0}, true, {0}));
  EXPECT_EQ(data.high_samples().size(), 1u);
  EXPECT_DOUBLE_EQ(data.high_samples()[0].weight, 5.0);
}

TEST(Fixpoint, ConvergesToOracleValues) {
  const CriticFixpointReport r = critic_fixpoint_check(1);
  EXPECT_TRUE(r.passed()) << r.sup_high << " " << r.sup_low << " " << r.sup_flat;
  EXPECT_LE(*r.converged_epoch, 500);
  EXPECT_LE(*r.flat_converged_epoch, 500);
  EXPECT_TRUE(r.monotone);
}

// Time-indexed tables on the exact trajectory distribution of a random policy:
// the reducible residual does not increase from one fitted-iteration epoch to the next.
TEST(Fixpoint, ResidualMonotoneProperty) {
  const FetchChain env(3, 5);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    std::mt19937_64 eng(seed);
    const PolicyParams p = random_params(eng, policy_shape_for(env, 2));
    for (double gamma : {1.0, 0.9}) {
      CriticDataset data(env.num_states(), 2, env.horizon() + 1, gamma);
      for_each_trajectory(env, p, env.horizon(),
                          [&](const Trajectory& traj, double prob) { data.add(traj, prob); });
      for (double lr : {0.1, 0.05}) {
        const CriticFit fit = fit_critic(data.make_tables(), data, {lr, 150, false});
        const FlatCriticFit flat = fit_flat_critic(data.make_flat_table(), data, {lr, 150, false});
        for (std::size_t i = 1; i < fit.high_residual.size(); ++i) {
          const double slack = 1e-12 * (1.0 + fit.high_residual[i - 1] + fit.low_residual[i - 1]);
          ASSERT_LE(fit.high_residual[i], fit.high_residual[i - 1] + slack)
              << "seed " << seed << " gamma " << gamma << " lr " << lr << " epoch " << i;
          ASSERT_LE(fit.low_residual[i], fit.low_residual[i - 1] + slack)
              << "seed " << seed << " gamma " << gamma << " lr " << lr << " epoch " << i;
          ASSERT_LE(flat.residual[i], flat.residual[i - 1] + 1e-12 * (1.0 + flat.residual[i - 1]));
        }
      }
    }
  }
}

TEST(Checkpoint, RoundTripExact) {
  std::mt19937_64 eng(2);
  const ValueTables v = random_tables(eng, 7, 3, 5);
  std::stringstream ss;
  save_critic(ss, v);
  const ValueTables w = load_critic(ss);
  ASSERT_EQ(w.num_slices(), 5);
  for (std::size_t i = 0; i < v.high_values().size(); ++i) EXPECT_EQ(v.high_values()[i], w.high_values()[i]);
  for (std::size_t i = 0; i < v.low_values().size(); ++i) EXPECT_EQ(v.low_values()[i], w.low_values()[i]);

  FlatValueTable f(4, 3);
  f.value(2, 1) = 0.1;
  std::stringstream fs;
  save_flat_critic(fs, f);
  EXPECT_EQ(load_flat_critic(fs).value(2, 1), 0.1);
}

TEST(Checkpoint, HeadersChecked) {
  std::stringstream ss;
  save_flat_critic(ss, FlatValueTable(2));
  EXPECT_ANY_THROW(load_critic(ss));
}

}  // namespace
}  // namespace hiper
