#include "hiper/core/types.hpp"

#include <string>

namespace hiper {

StateId Trajectory::next_state(int t) const {
  if (t < 0 || t >= length()) {
    throw std::out_of_range("next_state: turn " + std::to_string(t) + " outside [0," +
                            std::to_string(length()) + ")");
  }
  if (t + 1 < length()) return turns[t + 1].state;
  if (!final_state) throw TrajectoryError("trajectory has no final_state");
  return *final_state;
}

void validate(const Trajectory& traj) {
  const int T = traj.length();
  if (T == 0) throw TrajectoryError("empty trajectory");
  for (int t = 0; t < T; ++t) {
    const TurnRecord& turn = traj.turns[t];
    const std::string where = "turn " + std::to_string(t) + ": ";
    if (turn.t != t) throw TrajectoryError(where + "index field is " + std::to_string(turn.t));
    if (t == 0) {
      if (!turn.switched()) throw TrajectoryError(where + "first turn must SWITCH");
      if (turn.prev_subgoal) throw TrajectoryError(where + "first turn has a previous subgoal");
    } else {
      const SubgoalId prev = traj.turns[t - 1].subgoal;
      if (turn.prev_subgoal != prev) throw TrajectoryError(where + "prev_subgoal does not chain");
      if (!turn.switched() && turn.subgoal != prev) {
        throw TrajectoryError(where + "KEEP changed the subgoal");
      }
    }
    if (turn.done && t != T - 1) throw TrajectoryError(where + "done before the last turn");
  }
  if (traj.truncated && traj.terminated()) {
    throw TrajectoryError("trajectory is both terminated and truncated");
  }
}

}  // namespace hiper
