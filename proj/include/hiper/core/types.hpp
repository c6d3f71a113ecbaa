#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hiper {

using StateId = int;
using SubgoalId = int;
using ActionId = int;

// Switch decision q_t. KEEP continues the active subgoal, SWITCH samples a new one.
enum class Switch : std::uint8_t { kKeep = 0, kSwitch = 1 };

inline int as_int(Switch q) { return q == Switch::kSwitch ? 1 : 0; }

// Per-head log-probabilities recorded when the behavior policy produced a turn.
// lp_switch is absent at t=0 (forced switch), lp_high is absent on KEEP turns.
struct BehaviorRecord {
  std::optional<double> lp_switch;
  std::optional<double> lp_high;
  double lp_low = 0.0;
  // pi_old(q=1 | s_t, o_{t-1}); meaningless at t=0.
  double beta = 1.0;
};

struct TurnRecord {
  int t = 0;
  StateId state = 0;
  std::optional<SubgoalId> prev_subgoal;
  Switch q = Switch::kSwitch;
  SubgoalId subgoal = 0;
  std::optional<std::string> subgoal_text;
  ActionId action = 0;
  std::optional<std::string> action_text;
  double reward = 0.0;      // shaped
  double raw_reward = 0.0;  // environment reward before KEEP/format penalties
  bool done = false;
  bool malformed = false;
  std::optional<BehaviorRecord> behavior;

  bool switched() const { return q == Switch::kSwitch; }
};

struct Trajectory {
  std::vector<TurnRecord> turns;
  bool truncated = false;
  // s_T: the state after the last turn. Needed to bootstrap truncated episodes.
  std::optional<StateId> final_state;
  std::uint64_t seed = 0;

  int length() const { return static_cast<int>(turns.size()); }
  // True when the final turn reached a terminal state.
  bool terminated() const { return !turns.empty() && turns.back().done; }
  // s_{t+1}, taken from the next turn or from final_state at t = T-1.
  StateId next_state(int t) const;
};

class TrajectoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws TrajectoryError when a turn breaks the record invariants:
// T >= 1, t indices consecutive, q_0 = SWITCH, KEEP keeps o_{t-1},
// prev_subgoal chains, done only on the last turn.
void validate(const Trajectory& traj);

}  // namespace hiper
