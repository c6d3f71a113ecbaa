#include "hiper/policy/policy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace hiper {

PolicyShape policy_shape_for(const EnvModel& env, int n_options) {
  if (n_options < 1) throw std::invalid_argument("n_options must be >= 1");
  return PolicyShape{env.num_states(), n_options, env.num_actions()};
}

double switch_prob(const PolicyParams& params, StateId s, SubgoalId o_prev) {
  auto row = params.switch_row(s, o_prev);
  // 1 / (1 + exp(keep - switch)), written to saturate cleanly at both ends.
  const double d = row[0] - row[1];
  if (d >= 0.0) {
    const double e = std::exp(-d);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(d));
}

namespace {

void check_turn(const TurnRecord& turn) {
  if (turn.t == 0) {
    if (!turn.switched()) throw TrajectoryError("turn 0 must SWITCH");
    return;
  }
  if (!turn.prev_subgoal) {
    throw TrajectoryError("turn " + std::to_string(turn.t) + " lacks prev_subgoal");
  }
  if (!turn.switched() && turn.subgoal != *turn.prev_subgoal) {
    throw TrajectoryError("turn " + std::to_string(turn.t) + ": KEEP changed the subgoal");
  }
}

// row += w * (e_i - softmax(logits))
void add_softmax_score(std::span<const double> logits, int chosen, double w,
                       std::span<double> row) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - m);
  for (std::size_t j = 0; j < logits.size(); ++j) {
    row[j] -= w * std::exp(logits[j] - m) / z;
  }
  row[chosen] += w;
}

int argmax_lowest(std::span<const double> v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace

HeadLogProbs log_prob(const PolicyParams& params, const TurnRecord& turn) {
  check_turn(turn);
  HeadLogProbs lp;
  if (turn.t > 0) {
    lp.lp_switch = log_softmax_at(params.switch_row(turn.state, *turn.prev_subgoal),
                                  as_int(turn.q));
  }
  if (turn.switched()) {
    params.check_subgoal(turn.subgoal);
    lp.lp_high = log_softmax_at(params.subgoal_row(turn.state), turn.subgoal);
  }
  params.check_action(turn.action);
  lp.lp_low = log_softmax_at(params.action_row(turn.state, turn.subgoal), turn.action);
  return lp;
}

void accumulate_score(const PolicyParams& params, const TurnRecord& turn,
                      const HeadWeights& w, GradTables& out) {
  check_turn(turn);
  if (turn.t > 0 && w.w_switch != 0.0) {
    add_softmax_score(params.switch_row(turn.state, *turn.prev_subgoal), as_int(turn.q),
                      w.w_switch, out.switch_row(turn.state, *turn.prev_subgoal));
  }
  if (turn.switched() && w.w_high != 0.0) {
    params.check_subgoal(turn.subgoal);
    add_softmax_score(params.subgoal_row(turn.state), turn.subgoal, w.w_high,
                      out.subgoal_row(turn.state));
  }
  if (w.w_low != 0.0) {
    params.check_action(turn.action);
    add_softmax_score(params.action_row(turn.state, turn.subgoal), turn.action, w.w_low,
                      out.action_row(turn.state, turn.subgoal));
  }
}

GradTables grad_log_prob(const PolicyParams& params, const TurnRecord& turn) {
  GradTables g(params.shape());
  accumulate_score(params, turn, HeadWeights{}, g);
  return g;
}

TurnSample sample_turn(const PolicyParams& params, StateId s, std::optional<SubgoalId> o_prev,
                       const CounterRng& rng, std::uint64_t stream, int turn) {
  TurnSample out;
  if (o_prev) {
    auto row = params.switch_row(s, *o_prev);
    std::array<double, 2> p{};
    softmax_into(row, p);
    const int q = sample_index(p, rng.uniform(stream, turn, CounterRng::kSwitchHead));
    out.q = q == 1 ? Switch::kSwitch : Switch::kKeep;
    out.behavior.lp_switch = log_softmax_at(row, q);
    out.behavior.beta = p[1];
  }
  if (out.q == Switch::kSwitch) {
    auto row = params.subgoal_row(s);
    const std::vector<double> p = softmax(row);
    out.subgoal = sample_index(p, rng.uniform(stream, turn, CounterRng::kSubgoalHead));
    out.behavior.lp_high = log_softmax_at(row, out.subgoal);
  } else {
    out.subgoal = *o_prev;
  }
  auto row = params.action_row(s, out.subgoal);
  const std::vector<double> p = softmax(row);
  out.action = sample_index(p, rng.uniform(stream, turn, CounterRng::kActionHead));
  out.behavior.lp_low = log_softmax_at(row, out.action);
  return out;
}

TurnSample greedy_turn(const PolicyParams& params, StateId s, std::optional<SubgoalId> o_prev) {
  TurnSample out;
  if (o_prev) {
    auto row = params.switch_row(s, *o_prev);
    const int q = argmax_lowest(row);
    out.q = q == 1 ? Switch::kSwitch : Switch::kKeep;
    out.behavior.lp_switch = log_softmax_at(row, q);
    out.behavior.beta = switch_prob(params, s, *o_prev);
  }
  if (out.q == Switch::kSwitch) {
    auto row = params.subgoal_row(s);
    out.subgoal = argmax_lowest(row);
    out.behavior.lp_high = log_softmax_at(row, out.subgoal);
  } else {
    out.subgoal = *o_prev;
  }
  auto row = params.action_row(s, out.subgoal);
  out.action = argmax_lowest(row);
  out.behavior.lp_low = log_softmax_at(row, out.action);
  return out;
}

}  // namespace hiper
