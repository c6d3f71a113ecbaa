#pragma once

#include <vector>

#include "hiper/core/types.hpp"

namespace hiper {

// A maximal constant-subgoal run [begin, end) compressed into one macro-step.
struct SegmentView {
  int k = 0;
  int begin = 0;
  int end = 0;
  SubgoalId subgoal = 0;
  double macro_reward = 0.0;  // sum_{t in [begin,end)} gamma^(t-begin) r_t
  double discount = 1.0;      // gamma^(end-begin)

  int length() const { return end - begin; }
};

// [b_0 = 0, interior SWITCH turns..., b_K = T].
std::vector<int> segment_boundaries(const Trajectory& traj);

std::vector<SegmentView> segment_views(const Trajectory& traj, double gamma);

// Index k of the segment containing turn t, given boundaries from segment_boundaries.
int segment_of(const std::vector<int>& boundaries, int t);

double return_to_go(const Trajectory& traj, double gamma, int t);
std::vector<double> returns_to_go(const Trajectory& traj, double gamma);

// Subtracts c_keep from the shaped reward of every KEEP turn; raw_reward is untouched.
Trajectory apply_keep_penalty(Trajectory traj, double c_keep);

void check_gamma(double gamma);

}  // namespace hiper
