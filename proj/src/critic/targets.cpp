#include <stdexcept>

#include "hiper/core/segments.hpp"
#include "hiper/critic/critic.hpp"

namespace hiper {

namespace {

// V_high at boundary b (b == T means the state after the last turn).
double high_at(const Trajectory& traj, const ValueTables& tables, int b) {
  const int T = traj.length();
  if (b < T) return tables.high(traj.turns[b].state, b);
  if (traj.terminated()) return 0.0;
  return tables.high(traj.next_state(T - 1), T);
}

}  // namespace

double v_next(const Trajectory& traj, const std::vector<int>& boundaries,
              const ValueTables& tables, int t) {
  const int k = segment_of(boundaries, t);
  const int end = boundaries[k + 1];
  if (t + 1 == end) return high_at(traj, tables, end);
  return tables.low(traj.turns[t + 1].state, traj.turns[t].subgoal, t + 1);
}

double v_next(const Trajectory& traj, const ValueTables& tables, int t) {
  return v_next(traj, segment_boundaries(traj), tables, t);
}

std::vector<double> high_targets(const Trajectory& traj, const ValueTables& tables,
                                 double gamma) {
  const std::vector<SegmentView> segs = segment_views(traj, gamma);
  std::vector<double> y;
  y.reserve(segs.size());
  for (const SegmentView& seg : segs) {
    y.push_back(seg.macro_reward + seg.discount * high_at(traj, tables, seg.end));
  }
  return y;
}

std::vector<double> low_targets(const Trajectory& traj, const ValueTables& tables,
                                double gamma) {
  check_gamma(gamma);
  const std::vector<int> b = segment_boundaries(traj);
  std::vector<double> y(traj.turns.size());
  for (int t = 0; t < traj.length(); ++t) {
    y[t] = traj.turns[t].reward + gamma * v_next(traj, b, tables, t);
  }
  return y;
}

double flat_v_next(const Trajectory& traj, const FlatValueTable& flat, int t) {
  const int T = traj.length();
  if (t < 0 || t >= T) throw std::out_of_range("flat_v_next: turn outside the episode");
  if (t + 1 < T) return flat.value(traj.turns[t + 1].state, t + 1);
  if (traj.terminated()) return 0.0;
  return flat.value(traj.next_state(t), T);
}

std::vector<double> flat_targets(const Trajectory& traj, const FlatValueTable& flat,
                                 double gamma) {
  check_gamma(gamma);
  const int T = traj.length();
  std::vector<double> y(traj.turns.size());
  double acc = flat_v_next(traj, flat, T - 1);
  for (int t = T - 1; t >= 0; --t) {
    acc = traj.turns[t].reward + gamma * acc;
    y[t] = acc;
  }
  return y;
}

}  // namespace hiper
