#include "hiper/oracle/enumerate.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hiper/policy/policy.hpp"

namespace hiper {

std::uint64_t leaf_bound(const EnvModel& env, const PolicyShape& shape, int horizon) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  auto mul = [](std::uint64_t a, std::uint64_t b) {
    return (b != 0 && a > kMax / b) ? kMax : a * b;
  };
  std::uint64_t n = env.initial_distribution().size();
  n = mul(n, static_cast<std::uint64_t>(shape.subgoals) * shape.actions);
  const std::uint64_t later = static_cast<std::uint64_t>(1 + shape.subgoals) * shape.actions;
  for (int t = 1; t < horizon; ++t) n = mul(n, later);
  return n;
}

namespace {

// Per-row probabilities and log-probabilities, computed once per enumeration.
struct RowCache {
  PolicyShape shape;
  std::vector<double> switch_p, switch_lp, subgoal_p, subgoal_lp, action_p, action_lp;

  explicit RowCache(const PolicyParams& params) : shape(params.shape()) {
    auto fill = [](std::span<const double> logits, std::vector<double>& p,
                   std::vector<double>& lp) {
      const std::vector<double> row = softmax(logits);
      for (std::size_t i = 0; i < row.size(); ++i) {
        p.push_back(row[i]);
        lp.push_back(log_softmax_at(logits, static_cast<int>(i)));
      }
    };
    for (int s = 0; s < shape.states; ++s) {
      for (int o = 0; o < shape.subgoals; ++o) fill(params.switch_row(s, o), switch_p, switch_lp);
      fill(params.subgoal_row(s), subgoal_p, subgoal_lp);
      for (int o = 0; o < shape.subgoals; ++o) fill(params.action_row(s, o), action_p, action_lp);
    }
  }

  std::size_t sw(StateId s, SubgoalId o, int q) const {
    return (static_cast<std::size_t>(s) * shape.subgoals + o) * 2 + q;
  }
  std::size_t hi(StateId s, SubgoalId o) const {
    return static_cast<std::size_t>(s) * shape.subgoals + o;
  }
  std::size_t lo(StateId s, SubgoalId o, ActionId a) const {
    return (static_cast<std::size_t>(s) * shape.subgoals + o) * shape.actions + a;
  }
};

class Enumerator {
 public:
  Enumerator(const EnvModel& env, const PolicyParams& params, int horizon, double c_keep,
             const TrajectoryVisitor& visit)
      : env_(env), cache_(params), horizon_(horizon), c_keep_(c_keep), visit_(visit) {}

  void run() {
    for (const auto& [s0, p0] : env_.initial_distribution()) {
      if (p0 > 0.0) expand(0, s0, std::nullopt, p0);
    }
  }

 private:
  void expand(int t, StateId s, std::optional<SubgoalId> o_prev, double prob) {
    const PolicyShape& sh = cache_.shape;
    for (int q = o_prev ? 0 : 1; q <= 1; ++q) {
      double pq = 1.0;
      BehaviorRecord rec;
      if (o_prev) {
        pq = cache_.switch_p[cache_.sw(s, *o_prev, q)];
        rec.lp_switch = cache_.switch_lp[cache_.sw(s, *o_prev, q)];
        rec.beta = cache_.switch_p[cache_.sw(s, *o_prev, 1)];
      }
      if (pq == 0.0) continue;
      const int o_first = q == 1 ? 0 : *o_prev;
      const int o_last = q == 1 ? sh.subgoals - 1 : *o_prev;
      for (int o = o_first; o <= o_last; ++o) {
        double po = pq;
        if (q == 1) {
          po *= cache_.subgoal_p[cache_.hi(s, o)];
          rec.lp_high = cache_.subgoal_lp[cache_.hi(s, o)];
        } else {
          rec.lp_high.reset();
        }
        if (po == 0.0) continue;
        for (int a = 0; a < sh.actions; ++a) {
          const double pa = po * cache_.action_p[cache_.lo(s, o, a)];
          if (pa == 0.0) continue;
          rec.lp_low = cache_.action_lp[cache_.lo(s, o, a)];
          const StepResult step = env_.step(s, a);
          TurnRecord turn;
          turn.t = t;
          turn.state = s;
          turn.prev_subgoal = o_prev;
          turn.q = q == 1 ? Switch::kSwitch : Switch::kKeep;
          turn.subgoal = o;
          turn.action = a;
          turn.raw_reward = step.reward;
          turn.reward = step.reward - (q == 0 ? c_keep_ : 0.0);
          turn.done = step.done;
          turn.behavior = rec;
          path_.turns.push_back(std::move(turn));
          const double p = prob * pa;
          if (step.done || t + 1 == horizon_) {
            path_.final_state = step.next;
            path_.truncated = !step.done;
            visit_(path_, p);
          } else {
            expand(t + 1, step.next, o, p);
          }
          path_.turns.pop_back();
        }
      }
    }
  }

  const EnvModel& env_;
  RowCache cache_;
  int horizon_;
  double c_keep_;
  const TrajectoryVisitor& visit_;
  Trajectory path_;
};

}  // namespace

void for_each_trajectory(const EnvModel& env, const PolicyParams& params, int horizon,
                         const TrajectoryVisitor& visit, double c_keep,
                         const EnumerationLimits& limits) {
  if (horizon < 1) throw std::invalid_argument("enumeration horizon must be >= 1");
  const PolicyShape& sh = params.shape();
  if (sh.states != env.num_states() || sh.actions != env.num_actions()) {
    throw std::invalid_argument("policy shape does not match the environment");
  }
  const std::uint64_t bound = leaf_bound(env, sh, horizon);
  if (bound > limits.max_leaves) {
    throw EnumerationCapExceeded("enumeration would visit up to " + std::to_string(bound) +
                                 " leaves, cap is " + std::to_string(limits.max_leaves));
  }
  Enumerator(env, params, horizon, c_keep, visit).run();
}

double TrajectoryDistribution::total_probability() const {
  double sum = 0.0;
  for (double p : probabilities) sum += p;
  return sum;
}

TrajectoryDistribution enumerate_trajectories(const EnvModel& env, const PolicyParams& params,
                                              int horizon, double c_keep,
                                              const EnumerationLimits& limits) {
  TrajectoryDistribution dist;
  for_each_trajectory(
      env, params, horizon,
      [&](const Trajectory& traj, double p) {
        dist.trajectories.push_back(traj);
        dist.probabilities.push_back(p);
      },
      c_keep, limits);
  return dist;
}

}  // namespace hiper
