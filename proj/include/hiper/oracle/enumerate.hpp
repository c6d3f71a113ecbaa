#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hiper/core/env.hpp"
#include "hiper/policy/tables.hpp"

namespace hiper {

struct EnumerationLimits {
  std::uint64_t max_leaves = 100'000'000;
};

class EnumerationCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Upper bound on the number of leaves: |init| * |O||A| * ((1+|O|)|A|)^(H-1).
// Saturates at UINT64_MAX.
std::uint64_t leaf_bound(const EnvModel& env, const PolicyShape& shape, int horizon);

// Receives every complete trajectory with its probability. The trajectory
// reference is only valid during the call.
using TrajectoryVisitor = std::function<void(const Trajectory&, double)>;

// Depth-first expansion over (q, o if switching, a). Branches of probability
// exactly zero are pruned. Behavior records hold the exact per-head log-probs.
// Throws EnumerationCapExceeded when leaf_bound exceeds the cap.
void for_each_trajectory(const EnvModel& env, const PolicyParams& params, int horizon,
                         const TrajectoryVisitor& visit, double c_keep = 0.0,
                         const EnumerationLimits& limits = {});

struct TrajectoryDistribution {
  std::vector<Trajectory> trajectories;
  std::vector<double> probabilities;

  std::size_t size() const { return trajectories.size(); }
  double total_probability() const;
};

TrajectoryDistribution enumerate_trajectories(const EnvModel& env, const PolicyParams& params,
                                              int horizon, double c_keep = 0.0,
                                              const EnumerationLimits& limits = {});

}  // namespace hiper
