#include "hiper/core/segments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hiper {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in (0,1], got " + std::to_string(gamma));
  }
}

std::vector<int> segment_boundaries(const Trajectory& traj) {
  const int T = traj.length();
  if (T == 0) throw TrajectoryError("segment_boundaries: empty trajectory");
  if (!traj.turns.front().switched()) {
    throw TrajectoryError("segment_boundaries: first turn must SWITCH");
  }
  std::vector<int> b{0};
  for (int t = 1; t < T; ++t) {
    if (traj.turns[t].switched()) b.push_back(t);
  }
  b.push_back(T);
  return b;
}

std::vector<SegmentView> segment_views(const Trajectory& traj, double gamma) {
  check_gamma(gamma);
  const std::vector<int> b = segment_boundaries(traj);
  std::vector<SegmentView> out;
  out.reserve(b.size() - 1);
  for (std::size_t k = 0; k + 1 < b.size(); ++k) {
    SegmentView seg;
    seg.k = static_cast<int>(k);
    seg.begin = b[k];
    seg.end = b[k + 1];
    seg.subgoal = traj.turns[seg.begin].subgoal;
    double disc = 1.0;
    for (int t = seg.begin; t < seg.end; ++t) {
      seg.macro_reward += disc * traj.turns[t].reward;
      disc *= gamma;
    }
    seg.discount = disc;
    out.push_back(seg);
  }
  return out;
}

int segment_of(const std::vector<int>& boundaries, int t) {
  if (boundaries.size() < 2 || t < boundaries.front() || t >= boundaries.back()) {
    throw std::out_of_range("segment_of: turn " + std::to_string(t) + " outside the episode");
  }
  auto it = std::upper_bound(boundaries.begin(), boundaries.end(), t);
  return static_cast<int>(it - boundaries.begin()) - 1;
}

double return_to_go(const Trajectory& traj, double gamma, int t) {
  if (t < 0 || t >= traj.length()) {
    throw std::out_of_range("return_to_go: turn " + std::to_string(t) + " outside [0," +
                            std::to_string(traj.length()) + ")");
  }
  double g = 0.0;
  for (int l = traj.length() - 1; l >= t; --l) g = traj.turns[l].reward + gamma * g;
  return g;
}

std::vector<double> returns_to_go(const Trajectory& traj, double gamma) {
  std::vector<double> g(traj.turns.size());
  double acc = 0.0;
  for (int l = traj.length() - 1; l >= 0; --l) {
    acc = traj.turns[l].reward + gamma * acc;
    g[l] = acc;
  }
  return g;
}

Trajectory apply_keep_penalty(Trajectory traj, double c_keep) {
  if (c_keep < 0.0) throw std::invalid_argument("c_keep must be non-negative");
  for (TurnRecord& turn : traj.turns) {
    if (!turn.switched()) turn.reward -= c_keep;
  }
  return traj;
}

}  // namespace hiper
