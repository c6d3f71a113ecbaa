#pragma once

#include <vector>

#include "hiper/core/env.hpp"
#include "hiper/critic/critic.hpp"
#include "hiper/oracle/enumerate.hpp"

namespace hiper {

// Exact conditional expectations of the return-to-go under the enumerated
// distribution, indexed by turn t (horizon + 1 slices; slice H is the
// post-horizon bootstrap and equals 0). A cell is defined when its context
// occurs with positive probability; undefined cells hold 0.
struct OracleValues {
  int horizon = 0;
  ValueTables tables;   // V_high(s,t) = E[G_t | s_t=s, q_t=1], V_low(s,o,t) = E[G_t | s_t=s, o_t=o]
  FlatValueTable flat;  // V_flat(s,t) = E[G_t | s_t=s]
  std::vector<double> high_mass, low_mass, flat_mass;

  // E[G_t | s_t, o_{t-1}, q_t] for t >= 1.
  std::vector<double> switch_q, switch_q_mass;

  double expected_return = 0.0;  // J = E[G_0]
  double total_probability = 0.0;

  bool high_defined(StateId s, int t) const { return high_mass[tables.high_index(s, t)] > 0.0; }
  bool low_defined(StateId s, SubgoalId o, int t) const {
    return low_mass[tables.low_index(s, o, t)] > 0.0;
  }
  bool flat_defined(StateId s, int t) const { return flat_mass[flat.index(s, t)] > 0.0; }

  std::size_t switch_index(int t, StateId s, SubgoalId o_prev, int q) const;
  bool switch_defined(int t, StateId s, SubgoalId o_prev, int q) const {
    return switch_q_mass[switch_index(t, s, o_prev, q)] > 0.0;
  }
  // Q_switch(t,s,o_prev,q) - E[G_t | s_t, o_{t-1}]; the context must be defined.
  double true_switch_advantage(int t, StateId s, SubgoalId o_prev, int q) const;
};

OracleValues oracle_values(const EnvModel& env, const PolicyParams& params, double gamma,
                           int horizon, double c_keep = 0.0,
                           const EnumerationLimits& limits = {});

// Probability that an episode ends with the success reward within `horizon`
// turns. Forward recursion over (s, o_prev), so it scales to horizons where
// enumerating trajectories is out of reach.
double success_probability(const EnvModel& env, const PolicyParams& params, int horizon);

}  // namespace hiper
