#include <stdexcept>

#include "hiper/policy/policy.hpp"

namespace hiper {

namespace {

StateId draw_initial(const EnvModel& env, const CounterRng* rng, std::uint64_t stream) {
  const auto init = env.initial_distribution();
  if (init.size() == 1 || rng == nullptr) return init.front().first;
  std::vector<double> p;
  for (const auto& [s, prob] : init) p.push_back(prob);
  return init[sample_index(p, rng->uniform(stream, 0, CounterRng::kInitHead))].first;
}

template <typename Decide>
Trajectory run_episode(const EnvModel& env, int horizon, StateId s0, double c_keep,
                       Decide&& decide) {
  if (horizon < 1) throw std::invalid_argument("rollout horizon must be >= 1");
  if (c_keep < 0.0) throw std::invalid_argument("c_keep must be non-negative");
  Trajectory traj;
  StateId s = s0;
  std::optional<SubgoalId> o_prev;
  for (int t = 0; t < horizon; ++t) {
    const TurnSample d = decide(s, o_prev, t);
    const StepResult step = env.step(s, d.action);
    TurnRecord turn;
    turn.t = t;
    turn.state = s;
    turn.prev_subgoal = o_prev;
    turn.q = d.q;
    turn.subgoal = d.subgoal;
    turn.action = d.action;
    turn.raw_reward = step.reward;
    turn.reward = step.reward - (d.q == Switch::kKeep ? c_keep : 0.0);
    turn.done = step.done;
    turn.behavior = d.behavior;
    traj.turns.push_back(std::move(turn));
    s = step.next;
    o_prev = d.subgoal;
    if (step.done) break;
  }
  traj.final_state = s;
  traj.truncated = !traj.terminated();
  return traj;
}

}  // namespace

Trajectory rollout(const EnvModel& env, const PolicyParams& params, int horizon,
                   const CounterRng& rng, std::uint64_t stream, double c_keep) {
  Trajectory traj = run_episode(
      env, horizon, draw_initial(env, &rng, stream), c_keep,
      [&](StateId s, std::optional<SubgoalId> o_prev, int t) {
        return sample_turn(params, s, o_prev, rng, stream, t);
      });
  traj.seed = rng.seed();
  return traj;
}

Trajectory greedy_rollout(const EnvModel& env, const PolicyParams& params, int horizon,
                          double c_keep) {
  return run_episode(env, horizon, draw_initial(env, nullptr, 0), c_keep,
                     [&](StateId s, std::optional<SubgoalId> o_prev, int) {
                       return greedy_turn(params, s, o_prev);
                     });
}

}  // namespace hiper
