#pragma once

#include <vector>

#include "hiper/core/types.hpp"

namespace hiper::test {

// Turn t sits in state `states[t]` (default t); the subgoal id advances on each
// SWITCH. A terminal episode sets done on the last turn, otherwise the
// trajectory is truncated in `final_state`.
inline Trajectory make_traj(const std::vector<int>& q, const std::vector<double>& r,
                            bool terminal = true, std::vector<StateId> states = {},
                            StateId final_state = 0) {
  Trajectory traj;
  SubgoalId o = -1;
  for (std::size_t t = 0; t < q.size(); ++t) {
    TurnRecord turn;
    turn.t = static_cast<int>(t);
    turn.state = states.empty() ? static_cast<StateId>(t) : states[t];
    if (t > 0) turn.prev_subgoal = o;
    turn.q = q[t] ? Switch::kSwitch : Switch::kKeep;
    if (q[t]) ++o;
    turn.subgoal = o;
    turn.reward = turn.raw_reward = r[t];
    traj.turns.push_back(turn);
  }
  if (terminal) {
    traj.turns.back().done = true;
  } else {
    traj.truncated = true;
    traj.final_state = final_state;
  }
  return traj;
}

}  // namespace hiper::test
