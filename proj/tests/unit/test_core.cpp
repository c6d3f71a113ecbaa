#include <gtest/gtest.h>

#include <sstream>

#include "helpers.hpp"
#include "hiper/core/env.hpp"
#include "hiper/core/rng.hpp"
#include "hiper/core/segments.hpp"
#include "hiper/core/trajectory_io.hpp"

namespace hiper {
namespace {

using test::make_traj;

TEST(Segments, SingleTurn) {
  EXPECT_EQ(segment_boundaries(make_traj({1}, {0})), (std::vector<int>{0, 1}));
}

TEST(Segments, BoundariesFollowSwitches) {
  EXPECT_EQ(segment_boundaries(make_traj({1, 0, 0, 1, 0}, {0, 0, 0, 0, 0})),
            (std::vector<int>{0, 3, 5}));
  EXPECT_EQ(segment_boundaries(make_traj({1, 1, 1}, {0, 0, 0})), (std::vector<int>{0, 1, 2, 3}));
}

TEST(Segments, SegmentOfTurn) {
  const std::vector<int> b{0, 3, 5};
  EXPECT_EQ(segment_of(b, 0), 0);
  EXPECT_EQ(segment_of(b, 2), 0);
  EXPECT_EQ(segment_of(b, 3), 1);
  EXPECT_EQ(segment_of(b, 4), 1);
}

TEST(Segments, MacroRewardZero) {
  const auto v = segment_views(make_traj({1, 0, 0}, {0, 0, 0}), 1.0);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].macro_reward, 0.0);
  EXPECT_EQ(v[0].discount, 1.0);
}

TEST(Segments, MacroRewardDiscounted) {
  const auto v = segment_views(make_traj({1, 0, 0}, {1, 2, 4}), 0.5);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_DOUBLE_EQ(v[0].macro_reward, 3.0);
  EXPECT_DOUBLE_EQ(v[0].discount, 0.125);
}

TEST(Segments, MacroRewardSingleTerminalTurn) {
  const auto v = segment_views(make_traj({1}, {10}), 0.9);
  EXPECT_DOUBLE_EQ(v[0].macro_reward, 10.0);
  EXPECT_DOUBLE_EQ(v[0].discount, 0.9);
}

TEST(Segments, SegmentLengthsSumToEpisodeLength) {
  const Trajectory traj = make_traj({1, 0, 1, 1, 0, 0, 1}, {0, 1, 0, 0, 2, 0, 3});
  int total = 0;
  for (const SegmentView& s : segment_views(traj, 0.9)) total += s.length();
  EXPECT_EQ(total, traj.length());
}

TEST(Returns, ZeroDiscount) {
  const Trajectory traj = make_traj({1, 0, 0}, {1.5, -2, 7});
  for (int t = 0; t < 3; ++t) EXPECT_EQ(return_to_go(traj, 0.0, t), traj.turns[t].reward);
}

TEST(Returns, DirectSums) {
  EXPECT_DOUBLE_EQ(return_to_go(make_traj({1, 0, 0}, {1, 1, 1}), 1.0, 0), 3.0);
  EXPECT_DOUBLE_EQ(return_to_go(make_traj({1, 0, 0}, {0, 0, 10}), 0.5, 0), 2.5);
}

TEST(Returns, VectorMatchesScalar) {
  const Trajectory traj = make_traj({1, 0, 1, 0}, {1, -1, 3, 2});
  const std::vector<double> g = returns_to_go(traj, 0.7);
  for (int t = 0; t < 4; ++t) EXPECT_NEAR(g[t], return_to_go(traj, 0.7, t), 1e-14);
}

TEST(KeepPenalty, ZeroIsIdentity) {
  const Trajectory traj = make_traj({1, 0, 0}, {0, 0, 10});
  const Trajectory out = apply_keep_penalty(traj, 0.0);
  for (int t = 0; t < 3; ++t) EXPECT_EQ(out.turns[t].reward, traj.turns[t].reward);
}

TEST(KeepPenalty, SubtractsOnKeepTurns) {
  const Trajectory out = apply_keep_penalty(make_traj({1, 0, 0}, {0, 0, 10}), 0.3);
  EXPECT_DOUBLE_EQ(out.turns[0].reward, 0.0);
  EXPECT_DOUBLE_EQ(out.turns[1].reward, -0.3);
  EXPECT_DOUBLE_EQ(out.turns[2].reward, 9.7);
  EXPECT_DOUBLE_EQ(out.turns[2].raw_reward, 10.0);
}

TEST(FetchChain, DropAtHomeSucceeds) {
  const FetchChain env(3, 8);
  const StepResult r = env.step(env.encode(0, true), FetchChain::kDrop);
  EXPECT_TRUE(r.done);
  EXPECT_EQ(r.reward, 10.0);
  EXPECT_TRUE(env.is_terminal(r.next));
}

TEST(FetchChain, LeftAtBoundaryStays) {
  const FetchChain env(3, 8);
  const StepResult r = env.step(env.encode(0, false), FetchChain::kLeft);
  EXPECT_EQ(r.next, env.encode(0, false));
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_FALSE(r.done);
}

TEST(FetchChain, InvalidPickupIsPenalized) {
  const FetchChain env(3, 8);
  const StepResult r = env.step(env.encode(1, false), FetchChain::kPickup);
  EXPECT_EQ(r.next, env.encode(1, false));
  EXPECT_DOUBLE_EQ(r.reward, -0.1);
}

TEST(FetchChain, PickupAtFarEnd) {
  const FetchChain env(3, 8);
  const StepResult r = env.step(env.encode(2, false), FetchChain::kPickup);
  EXPECT_EQ(r.next, env.encode(2, true));
  EXPECT_EQ(r.reward, 0.0);
}

TEST(FetchChain, RejectsUnknownIds) {
  const FetchChain env(3, 8);
  EXPECT_THROW(env.step(99, 0), std::invalid_argument);
  EXPECT_THROW(env.step(0, 4), std::invalid_argument);
}

TEST(FetchChain, EncodingRoundTrips) {
  const FetchChain env(5, 20);
  for (int p = 0; p < 5; ++p) {
    for (bool c : {false, true}) {
      const StateId s = env.encode(p, c);
      EXPECT_EQ(env.position(s), p);
      EXPECT_EQ(env.carrying(s), c);
    }
  }
}

TEST(Rng, PureFunctionOfCounter) {
  const CounterRng a(7), b(7), c(8);
  EXPECT_EQ(a.bits(3, 4, 1), b.bits(3, 4, 1));
  EXPECT_NE(a.bits(3, 4, 1), c.bits(3, 4, 1));
  EXPECT_NE(a.bits(3, 4, 1), a.bits(3, 4, 2));
  const double u = a.uniform(1, 2, 0);
  EXPECT_GE(u, 0.0);
  EXPECT_LT(u, 1.0);
}

TEST(Rng, SampleIndexInverseCdf) {
  const std::vector<double> p{0.25, 0.5, 0.25};
  EXPECT_EQ(sample_index(p, 0.0), 0);
  EXPECT_EQ(sample_index(p, 0.3), 1);
  EXPECT_EQ(sample_index(p, 0.8), 2);
  EXPECT_EQ(sample_index(p, 0.999999), 2);
}

TEST(Validate, RejectsKeepAtFirstTurn) {
  Trajectory traj = make_traj({1, 0}, {0, 0});
  traj.turns[0].q = Switch::kKeep;
  EXPECT_THROW(validate(traj), TrajectoryError);
}

TEST(Validate, RejectsKeepWithNewSubgoal) {
  Trajectory traj = make_traj({1, 0}, {0, 0});
  traj.turns[1].subgoal = 5;
  EXPECT_THROW(validate(traj), TrajectoryError);
}

TEST(Validate, RejectsEarlyDone) {
  Trajectory traj = make_traj({1, 0, 0}, {0, 0, 0});
  traj.turns[1].done = true;
  EXPECT_THROW(validate(traj), TrajectoryError);
}

TEST(Jsonl, RoundTrip) {
  std::vector<Trajectory> trajs{make_traj({1, 0, 1}, {0.5, -0.1, 10}),
                                make_traj({1, 1}, {0, 0}, false, {}, 4)};
  trajs[0].turns[1].behavior = BehaviorRecord{-0.2, std::nullopt, -1.3, 0.4};
  trajs[0].turns[2].subgoal_text = "find a knife";
  trajs[0].turns[2].action_text = "go to diningtable 2";
  trajs[1].turns[1].malformed = true;
  std::stringstream ss;
  write_jsonl(ss, trajs);
  const std::vector<Trajectory> back = read_jsonl(ss);
  ASSERT_EQ(back.size(), 2u);
  std::stringstream again;
  write_jsonl(again, back);
  std::stringstream first;
  write_jsonl(first, trajs);
  EXPECT_EQ(again.str(), first.str());
  EXPECT_TRUE(back[1].truncated);
  EXPECT_EQ(back[1].final_state, 4);
  EXPECT_EQ(back[0].turns[2].action_text, "go to diningtable 2");
  EXPECT_DOUBLE_EQ(back[0].turns[1].behavior->beta, 0.4);
}

TEST(Jsonl, MalformedLineNamed) {
  std::stringstream ss("{\"t\":0,\"state\":0}\nnot json\n");
  try {
    read_jsonl(ss);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
  }
}

}  // namespace
}  // namespace hiper
