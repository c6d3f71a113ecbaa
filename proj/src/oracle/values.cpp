#include "hiper/oracle/values.hpp"

#include <algorithm>
#include <stdexcept>

#include "hiper/core/segments.hpp"
#include "hiper/policy/policy.hpp"

namespace hiper {

std::size_t OracleValues::switch_index(int t, StateId s, SubgoalId o_prev, int q) const {
  const int S = tables.num_states();
  const int O = tables.num_subgoals();
  if (t < 1 || t >= horizon || s < 0 || s >= S || o_prev < 0 || o_prev >= O || q < 0 ||
      q > 1) {
    throw std::out_of_range("switch context out of range");
  }
  return ((static_cast<std::size_t>(t) * S + s) * O + o_prev) * 2 + q;
}

double OracleValues::true_switch_advantage(int t, StateId s, SubgoalId o_prev, int q) const {
  const std::size_t i0 = switch_index(t, s, o_prev, 0);
  const std::size_t iq = i0 + q;
  if (switch_q_mass[iq] <= 0.0) throw std::domain_error("switch context has zero probability");
  const double m0 = switch_q_mass[i0];
  const double m1 = switch_q_mass[i0 + 1];
  const double v = (m0 * switch_q[i0] + m1 * switch_q[i0 + 1]) / (m0 + m1);
  return switch_q[iq] - v;
}

OracleValues oracle_values(const EnvModel& env, const PolicyParams& params, double gamma,
                           int horizon, double c_keep, const EnumerationLimits& limits) {
  check_gamma(gamma);
  const int S = env.num_states();
  const int O = params.shape().subgoals;
  OracleValues ov;
  ov.horizon = horizon;
  ov.tables = ValueTables(S, O, horizon + 1);
  ov.flat = FlatValueTable(S, horizon + 1);
  ov.high_mass.assign(ov.tables.high_values().size(), 0.0);
  ov.low_mass.assign(ov.tables.low_values().size(), 0.0);
  ov.flat_mass.assign(ov.flat.values().size(), 0.0);
  const std::size_t nswitch = static_cast<std::size_t>(horizon) * S * O * 2;
  ov.switch_q.assign(nswitch, 0.0);
  ov.switch_q_mass.assign(nswitch, 0.0);

  // Accumulate probability-weighted sums, then divide by the masses.
  auto high = ov.tables.high_values();
  auto low = ov.tables.low_values();
  auto flat = ov.flat.values();
  std::vector<double> g;
  for_each_trajectory(
      env, params, horizon,
      [&](const Trajectory& traj, double p) {
        const int T = traj.length();
        g.resize(T);
        double acc = 0.0;
        for (int t = T - 1; t >= 0; --t) {
          acc = traj.turns[t].reward + gamma * acc;
          g[t] = acc;
        }
        ov.expected_return += p * g[0];
        ov.total_probability += p;
        for (int t = 0; t < T; ++t) {
          const TurnRecord& turn = traj.turns[t];
          const std::size_t fi = ov.flat.index(turn.state, t);
          flat[fi] += p * g[t];
          ov.flat_mass[fi] += p;
          const std::size_t li = ov.tables.low_index(turn.state, turn.subgoal, t);
          low[li] += p * g[t];
          ov.low_mass[li] += p;
          if (turn.switched()) {
            const std::size_t hi = ov.tables.high_index(turn.state, t);
            high[hi] += p * g[t];
            ov.high_mass[hi] += p;
          }
          if (t >= 1) {
            const std::size_t si = ov.switch_index(t, turn.state, *turn.prev_subgoal, as_int(turn.q));
            ov.switch_q[si] += p * g[t];
            ov.switch_q_mass[si] += p;
          }
        }
      },
      c_keep, limits);

  auto normalize = [](std::span<double> v, const std::vector<double>& mass) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = mass[i] > 0.0 ? v[i] / mass[i] : 0.0;
  };
  normalize(high, ov.high_mass);
  normalize(low, ov.low_mass);
  normalize(flat, ov.flat_mass);
  normalize(ov.switch_q, ov.switch_q_mass);
  return ov;
}

double success_probability(const EnvModel& env, const PolicyParams& params, int horizon) {
  const PolicyShape& shape = params.shape();
  const int n_s = shape.states, n_o = shape.subgoals;
  // mass[s * n_o + o]: probability of being in s at turn t with o active.
  std::vector<double> mass(static_cast<std::size_t>(n_s) * n_o, 0.0), next(mass.size());
  double success = 0.0;
  auto act = [&](StateId s, SubgoalId o, double p) {
    const std::vector<double> pa = softmax(params.action_row(s, o));
    for (ActionId a = 0; a < shape.actions; ++a) {
      if (pa[a] == 0.0) continue;
      const StepResult r = env.step(s, a);
      if (r.done) {
        if (r.reward == env.success_reward()) success += p * pa[a];
      } else {
        next[static_cast<std::size_t>(r.next) * n_o + o] += p * pa[a];
      }
    }
  };
  std::fill(next.begin(), next.end(), 0.0);
  for (const auto& [s, p0] : env.initial_distribution()) {
    const std::vector<double> po = softmax(params.subgoal_row(s));
    for (SubgoalId o = 0; o < n_o; ++o) act(s, o, p0 * po[o]);
  }
  for (int t = 1; t < horizon; ++t) {
    mass.swap(next);
    std::fill(next.begin(), next.end(), 0.0);
    for (StateId s = 0; s < n_s; ++s) {
      const std::vector<double> po = softmax(params.subgoal_row(s));
      for (SubgoalId o_prev = 0; o_prev < n_o; ++o_prev) {
        const double p = mass[static_cast<std::size_t>(s) * n_o + o_prev];
        if (p == 0.0) continue;
        const double beta = switch_prob(params, s, o_prev);
        act(s, o_prev, p * (1.0 - beta));
        for (SubgoalId o = 0; o < n_o; ++o) act(s, o, p * beta * po[o]);
      }
    }
  }
  return success;
}

}  // namespace hiper

