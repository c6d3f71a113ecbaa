#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hiper/core/types.hpp"
#include "hiper/critic/critic.hpp"
#include "hiper/policy/tables.hpp"

namespace hiper {

enum class Whitening { kOff, kPerLevel };

struct GAEConfig {
  double gamma = 0.99;
  double lambda_low = 0.95;
  double lambda_high = 0.95;
  double lambda_flat = 0.95;
  Whitening whiten = Whitening::kOff;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// delta_low_t = r_t + gamma v_next(t) - V_low(s_t, o_t)
std::vector<double> low_td_residuals(const Trajectory& traj, const ValueTables& tables,
                                     double gamma);

// Backward (gamma lambda_low) accumulation that restarts at every boundary.
std::vector<double> low_advantages(std::span<const double> deltas,
                                   std::span<const int> boundaries, const GAEConfig& cfg);

struct HighAdvantages {
  std::vector<double> deltas;
  std::vector<double> advantages;
};

// Macro-step GAE over segments; lambda_high enters once per segment.
HighAdvantages high_advantages(const Trajectory& traj, const ValueTables& tables,
                               const GAEConfig& cfg);

// A_switch_t = (q_t - beta_t)(V_high(s_t) - V_low(s_t, o_{t-1})) for t = 1..T-1,
// stored at index t-1. beta_t comes from the turn's behavior record when
// present, otherwise from params.
std::vector<double> switch_advantages(const Trajectory& traj, const ValueTables& tables,
                                      const PolicyParams& params);

std::vector<double> flat_gae(const Trajectory& traj, const FlatValueTable& flat,
                             const GAEConfig& cfg);

struct HierarchicalAdvantages {
  std::vector<int> boundaries;
  std::vector<double> low;      // per turn
  std::vector<double> high;     // per segment
  std::vector<double> switch_;  // per turn t >= 1, at index t-1
  std::optional<std::vector<double>> flat;

  std::optional<double> switch_at(int t) const;
  // A_high of the segment that starts at turn t, if one does.
  std::optional<double> high_at(int t) const;
};

HierarchicalAdvantages estimate_all(const Trajectory& traj, const ValueTables& tables,
                                    const PolicyParams& params, const GAEConfig& cfg,
                                    const FlatValueTable* flat = nullptr);

// Whitening (when enabled) pools each level across the whole batch.
std::vector<HierarchicalAdvantages> estimate_batch(std::span<const Trajectory> batch,
                                                   const ValueTables& tables,
                                                   const PolicyParams& params,
                                                   const GAEConfig& cfg,
                                                   const FlatValueTable* flat = nullptr);

void whiten_per_level(std::span<HierarchicalAdvantages> batch);

}  // namespace hiper
