#include <ostream>

#include "hiper/core/segments.hpp"
#include "hiper/policy/policy.hpp"
#include "hiper/trainer/trainer.hpp"

namespace hiper {

SwitchStats switching_stats(std::span<const Trajectory> batch) {
  SwitchStats st;
  if (batch.empty()) return st;
  double turns = 0.0, segments = 0.0, decisions = 0.0, switches = 0.0;
  for (const Trajectory& traj : batch) {
    turns += traj.length();
    segments += static_cast<double>(segment_boundaries(traj).size() - 1);
    for (int t = 1; t < traj.length(); ++t) {
      decisions += 1.0;
      if (traj.turns[t].switched()) switches += 1.0;
    }
  }
  const double n = static_cast<double>(batch.size());
  st.mean_segments = segments / n;
  st.mean_seg_len = turns / segments;
  st.switch_rate = decisions > 0.0 ? switches / decisions : 0.0;
  st.mean_length = turns / n;
  return st;
}

bool succeeded(const Trajectory& traj, const EnvModel& env) {
  return traj.terminated() && traj.turns.back().raw_reward == env.success_reward();
}

EvalResult evaluate(const PolicyParams& params, const EnvModel& env, int episodes,
                    EvalMode mode, std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("evaluate needs at least one episode");
  const CounterRng rng(splitmix64(seed ^ 0xe7a1ULL));
  std::vector<Trajectory> runs;
  runs.reserve(episodes);
  EvalResult out;
  out.episodes = episodes;
  for (int e = 0; e < episodes; ++e) {
    runs.push_back(mode == EvalMode::kGreedy
                       ? greedy_rollout(env, params, env.horizon(), 0.0)
                       : rollout(env, params, env.horizon(), rng, e, 0.0));
    const Trajectory& traj = runs.back();
    if (succeeded(traj, env)) out.success_rate += 1.0;
    for (const TurnRecord& turn : traj.turns) out.mean_return += turn.raw_reward;
  }
  out.success_rate /= episodes;
  out.mean_return /= episodes;
  out.stats = switching_stats(runs);
  return out;
}

void write_metrics_header(std::ostream& out) {
  out << "iter,mean_return,success,mean_segments,mean_seg_len,switch_rate,actor_loss,"
         "critic_loss,kl\n";
}

void write_metrics_row(std::ostream& out, const MetricsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.iter,
                r.mean_return, r.success, r.mean_segments, r.mean_seg_len, r.switch_rate,
                r.actor_loss, r.critic_loss, r.kl);
  out << buf;
}

}  // namespace hiper
