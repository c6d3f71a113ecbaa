#include "hiper/trainer/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hiper/policy/policy.hpp"

namespace hiper {

PpoRatios ppo_ratios(const PolicyParams& live, const TurnRecord& turn) {
  if (!turn.behavior) {
    throw MissingBehavior("turn " + std::to_string(turn.t) + " has no behavior log-probs");
  }
  const BehaviorRecord& b = *turn.behavior;
  const HeadLogProbs lp = log_prob(live, turn);
  PpoRatios r;
  if (lp.lp_switch) {
    if (!b.lp_switch) throw MissingBehavior("turn " + std::to_string(turn.t) + " lacks lp_switch");
    r.r_switch = std::exp(*lp.lp_switch - *b.lp_switch);
  }
  if (lp.lp_high) {
    if (!b.lp_high) throw MissingBehavior("turn " + std::to_string(turn.t) + " lacks lp_high");
    r.r_high = std::exp(*lp.lp_high - *b.lp_high);
  }
  r.r_low = std::exp(lp.lp_low - b.lp_low);
  return r;
}

std::vector<TrainingTurn> make_training_turns(std::span<const Trajectory> batch,
                                              std::span<const HierarchicalAdvantages> adv,
                                              const ValueTables& tables, double gamma) {
  if (batch.size() != adv.size()) throw std::invalid_argument("advantages do not match batch");
  std::vector<TrainingTurn> out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Trajectory& traj = batch[i];
    const HierarchicalAdvantages& a = adv[i];
    if (a.low.size() != traj.turns.size()) {
      throw std::invalid_argument("advantage length differs from trajectory length");
    }
    const std::vector<double> y_low = low_targets(traj, tables, gamma);
    const std::vector<double> y_high = high_targets(traj, tables, gamma);
    std::size_t k = 0;
    for (const TurnRecord& turn : traj.turns) {
      TrainingTurn tt;
      tt.turn = turn;
      tt.a_low = a.low[turn.t];
      tt.y_low = y_low[turn.t];
      if (turn.t >= 1 && !turn.malformed) tt.a_switch = a.switch_at(turn.t);
      if (k < y_high.size() && a.boundaries[k] == turn.t) {
        tt.a_high = a.high[k];
        tt.y_high = y_high[k];
        ++k;
      }
      out.push_back(std::move(tt));
    }
  }
  return out;
}

std::vector<TrainingTurn> make_flat_training_turns(std::span<const Trajectory> batch,
                                                   std::span<const std::vector<double>> a_flat,
                                                   const FlatValueTable& flat, double gamma) {
  if (batch.size() != a_flat.size()) throw std::invalid_argument("advantages do not match batch");
  std::vector<TrainingTurn> out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::vector<double> y = flat_targets(batch[i], flat, gamma);
    for (const TurnRecord& turn : batch[i].turns) {
      TrainingTurn tt;
      tt.turn = turn;
      tt.a_flat = a_flat[i].at(turn.t);
      tt.y_flat = y[turn.t];
      out.push_back(std::move(tt));
    }
  }
  return out;
}

double clipped_surrogate(double ratio, double adv, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * adv, clipped * adv);
}

double clipped_surrogate_slope(double ratio, double adv, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  // The unclipped branch is active whenever it is the (weakly) smaller one.
  return ratio * adv <= clipped * adv ? adv : 0.0;
}

namespace {

void check_turns(std::span<const TrainingTurn> turns) {
  if (turns.empty()) throw std::invalid_argument("loss over an empty set of turns");
}

}  // namespace

ActorLoss actor_loss(std::span<const TrainingTurn> turns, const PolicyParams& live, double eps) {
  check_turns(turns);
  const double inv_m = 1.0 / static_cast<double>(turns.size());
  ActorLoss out;
  out.grad = GradTables(live.shape());
  for (const TrainingTurn& tt : turns) {
    const PpoRatios r = ppo_ratios(live, tt.turn);
    HeadWeights w{0.0, 0.0, 0.0};
    out.low += clipped_surrogate(r.r_low, tt.a_low, eps);
    w.w_low = clipped_surrogate_slope(r.r_low, tt.a_low, eps) * r.r_low * inv_m;
    if (tt.a_switch && r.r_switch) {
      out.switch_ += clipped_surrogate(*r.r_switch, *tt.a_switch, eps);
      w.w_switch = clipped_surrogate_slope(*r.r_switch, *tt.a_switch, eps) * *r.r_switch * inv_m;
    }
    if (tt.a_high && r.r_high) {
      out.high += clipped_surrogate(*r.r_high, *tt.a_high, eps);
      w.w_high = clipped_surrogate_slope(*r.r_high, *tt.a_high, eps) * *r.r_high * inv_m;
    }
    accumulate_score(live, tt.turn, w, out.grad);
  }
  out.low *= inv_m;
  out.high *= inv_m;
  out.switch_ *= inv_m;
  out.value = out.low + out.high + out.switch_;
  return out;
}

ActorLoss flat_actor_loss(std::span<const TrainingTurn> turns, const PolicyParams& live,
                          double eps) {
  check_turns(turns);
  const double inv_m = 1.0 / static_cast<double>(turns.size());
  ActorLoss out;
  out.grad = GradTables(live.shape());
  for (const TrainingTurn& tt : turns) {
    const PpoRatios r = ppo_ratios(live, tt.turn);
    const bool use_switch = r.r_switch && !tt.turn.malformed;
    double ratio = r.r_low * r.r_high.value_or(1.0) * (use_switch ? *r.r_switch : 1.0);
    out.value += clipped_surrogate(ratio, tt.a_flat, eps);
    const double w = clipped_surrogate_slope(ratio, tt.a_flat, eps) * ratio * inv_m;
    accumulate_score(live, tt.turn, HeadWeights{use_switch ? w : 0.0, w, w}, out.grad);
  }
  out.value *= inv_m;
  out.low = out.value;
  return out;
}

double categorical_kl(std::span<const double> logits, std::span<const double> ref_logits) {
  double kl = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    const double lp = log_softmax_at(logits, static_cast<int>(j));
    const double lr = log_softmax_at(ref_logits, static_cast<int>(j));
    kl += std::exp(lp) * (lp - lr);
  }
  return std::max(kl, 0.0);
}

namespace {

// Adds w * KL(row || ref) to value and its logit gradient to grad_row.
void add_row_kl(std::span<const double> row, std::span<const double> ref, double w,
                double& value, std::span<double> grad_row) {
  const std::size_t n = row.size();
  std::vector<double> lp(n), lr(n);
  double kl = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    lp[j] = log_softmax_at(row, static_cast<int>(j));
    lr[j] = log_softmax_at(ref, static_cast<int>(j));
    kl += std::exp(lp[j]) * (lp[j] - lr[j]);
  }
  value += w * kl;
  for (std::size_t j = 0; j < n; ++j) {
    grad_row[j] += w * std::exp(lp[j]) * (lp[j] - lr[j] - kl);
  }
}

}  // namespace

KlPenalty kl_penalty(const PolicyParams& live, const PolicyParams& ref,
                     std::span<const TrainingTurn> turns) {
  check_turns(turns);
  if (!(live.shape() == ref.shape())) throw std::invalid_argument("reference shape mismatch");
  const double w = 1.0 / static_cast<double>(turns.size());
  KlPenalty out;
  out.grad = GradTables(live.shape());
  for (const TrainingTurn& tt : turns) {
    const TurnRecord& turn = tt.turn;
    if (turn.t > 0) {
      add_row_kl(live.switch_row(turn.state, *turn.prev_subgoal),
                 ref.switch_row(turn.state, *turn.prev_subgoal), w, out.value,
                 out.grad.switch_row(turn.state, *turn.prev_subgoal));
    }
    if (turn.switched()) {
      add_row_kl(live.subgoal_row(turn.state), ref.subgoal_row(turn.state), w, out.value,
                 out.grad.subgoal_row(turn.state));
    }
    add_row_kl(live.action_row(turn.state, turn.subgoal), ref.action_row(turn.state, turn.subgoal),
               w, out.value, out.grad.action_row(turn.state, turn.subgoal));
  }
  return out;
}

CriticLoss critic_loss(const ValueTables& tables, std::span<const TrainingTurn> turns) {
  check_turns(turns);
  const double inv_m = 1.0 / static_cast<double>(turns.size());
  CriticLoss out;
  out.grad = ValueTables(tables.num_states(), tables.num_subgoals(), tables.num_slices());
  for (const TrainingTurn& tt : turns) {
    const TurnRecord& turn = tt.turn;
    const double el = tables.low(turn.state, turn.subgoal, turn.t) - tt.y_low;
    out.low += el * el;
    out.grad.low(turn.state, turn.subgoal, turn.t) += 2.0 * el * inv_m;
    if (tt.y_high) {
      const double eh = tables.high(turn.state, turn.t) - *tt.y_high;
      out.high += eh * eh;
      out.grad.high(turn.state, turn.t) += 2.0 * eh * inv_m;
    }
  }
  out.low *= inv_m;
  out.high *= inv_m;
  out.value = out.low + out.high;
  return out;
}

FlatCriticLoss flat_critic_loss(const FlatValueTable& table, std::span<const TrainingTurn> turns) {
  check_turns(turns);
  const double inv_m = 1.0 / static_cast<double>(turns.size());
  FlatCriticLoss out;
  out.grad = FlatValueTable(table.num_states(), table.num_slices());
  for (const TrainingTurn& tt : turns) {
    const double e = table.value(tt.turn.state, tt.turn.t) - tt.y_flat;
    out.value += e * e * inv_m;
    out.grad.value(tt.turn.state, tt.turn.t) += 2.0 * e * inv_m;
  }
  return out;
}

namespace {

void scale(std::span<double> v, double c) {
  for (double& x : v) x *= c;
}

}  // namespace

TotalLoss total_loss(const PolicyParams& live, const PolicyParams& ref, const ValueTables& tables,
                     std::span<const TrainingTurn> turns, const LossWeights& w) {
  ActorLoss actor = actor_loss(turns, live, w.clip_eps);
  KlPenalty kl = kl_penalty(live, ref, turns);
  CriticLoss critic = critic_loss(tables, turns);
  TotalLoss out;
  out.actor = actor.value;
  out.critic = critic.value;
  out.kl = kl.value;
  out.value = -actor.value + w.c_v * critic.value + w.kl_beta * kl.value;
  out.actor_grad = std::move(actor.grad);
  out.actor_grad *= -1.0;
  out.actor_grad.add_scaled(kl.grad, w.kl_beta);
  out.critic_grad = std::move(critic.grad);
  scale(out.critic_grad.high_values(), w.c_v);
  scale(out.critic_grad.low_values(), w.c_v);
  return out;
}

FlatTotalLoss flat_total_loss(const PolicyParams& live, const PolicyParams& ref,
                              const FlatValueTable& table, std::span<const TrainingTurn> turns,
                              const LossWeights& w) {
  ActorLoss actor = flat_actor_loss(turns, live, w.clip_eps);
  KlPenalty kl = kl_penalty(live, ref, turns);
  FlatCriticLoss critic = flat_critic_loss(table, turns);
  FlatTotalLoss out;
  out.actor = actor.value;
  out.critic = critic.value;
  out.kl = kl.value;
  out.value = -actor.value + w.c_v * critic.value + w.kl_beta * kl.value;
  out.actor_grad = std::move(actor.grad);
  out.actor_grad *= -1.0;
  out.actor_grad.add_scaled(kl.grad, w.kl_beta);
  out.critic_grad = std::move(critic.grad);
  scale(out.critic_grad.values(), w.c_v);
  return out;
}

}  // namespace hiper
