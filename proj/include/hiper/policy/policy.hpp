#pragma once

#include <optional>

#include "hiper/core/env.hpp"
#include "hiper/core/rng.hpp"
#include "hiper/core/types.hpp"
#include "hiper/policy/tables.hpp"

namespace hiper {

PolicyShape policy_shape_for(const EnvModel& env, int n_options);

// beta = pi(q=SWITCH | s, o_prev)
double switch_prob(const PolicyParams& params, StateId s, SubgoalId o_prev);

struct HeadLogProbs {
  std::optional<double> lp_switch;
  std::optional<double> lp_high;
  double lp_low = 0.0;

  double total() const { return lp_switch.value_or(0.0) + lp_high.value_or(0.0) + lp_low; }
};

// Throws TrajectoryError for a turn that breaks the KEEP/first-turn rules.
HeadLogProbs log_prob(const PolicyParams& params, const TurnRecord& turn);

// Per-head multipliers for score accumulation; a head absent from the turn is skipped.
struct HeadWeights {
  double w_switch = 1.0;
  double w_high = 1.0;
  double w_low = 1.0;
};

GradTables grad_log_prob(const PolicyParams& params, const TurnRecord& turn);
// out += sum over present heads of w_head * d log pi_head / d theta.
void accumulate_score(const PolicyParams& params, const TurnRecord& turn,
                      const HeadWeights& w, GradTables& out);

struct TurnSample {
  Switch q = Switch::kSwitch;
  SubgoalId subgoal = 0;
  ActionId action = 0;
  BehaviorRecord behavior;
};

// Draws (q, o, a) with per-head uniforms keyed by (stream, turn, head).
// Without o_prev (t = 0) the switch is forced and no switch log-prob is recorded.
TurnSample sample_turn(const PolicyParams& params, StateId s, std::optional<SubgoalId> o_prev,
                       const CounterRng& rng, std::uint64_t stream, int turn);

// Argmax on every head, ties to the lowest index (KEEP before SWITCH).
TurnSample greedy_turn(const PolicyParams& params, StateId s, std::optional<SubgoalId> o_prev);

// One episode until done or horizon turns. The KEEP penalty is folded into reward.
Trajectory rollout(const EnvModel& env, const PolicyParams& params, int horizon,
                   const CounterRng& rng, std::uint64_t stream, double c_keep);
Trajectory greedy_rollout(const EnvModel& env, const PolicyParams& params, int horizon,
                          double c_keep);

}  // namespace hiper
