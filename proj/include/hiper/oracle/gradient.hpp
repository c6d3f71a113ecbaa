#pragma once

#include <functional>

#include "hiper/core/env.hpp"
#include "hiper/core/rng.hpp"
#include "hiper/critic/critic.hpp"
#include "hiper/hae/hae.hpp"
#include "hiper/oracle/enumerate.hpp"

namespace hiper {

// J(theta) = E[sum_t gamma^t r_t] by exact enumeration.
double expected_return(const EnvModel& env, const PolicyParams& params, double gamma,
                       int horizon, double c_keep = 0.0, const EnumerationLimits& limits = {});

// Exact grad J = sum_tau P(tau) (sum_t score_t) R(tau). The forced first switch
// has no parameters and contributes nothing.
GradTables oracle_gradient(const EnvModel& env, const PolicyParams& params, double gamma,
                           int horizon, double c_keep = 0.0,
                           const EnumerationLimits& limits = {});

// E[sum_t score_t] by exact enumeration; zero for any policy.
GradTables expected_score(const EnvModel& env, const PolicyParams& params, int horizon,
                          const EnumerationLimits& limits = {});

// Central differences of f over every logit.
GradTables finite_difference_gradient(const std::function<double(const PolicyParams&)>& f,
                                      const PolicyParams& params, double h = 1e-5);

struct McGradient {
  GradTables mean;
  GradTables std_error;
  int samples = 0;
};

// Per-episode estimate: switch score x A_switch (t >= 1), subgoal score x A_high
// at segment starts, action score x A_low. Whitening is ignored.
GradTables hae_gradient_estimate(const Trajectory& traj, const HierarchicalAdvantages& adv,
                                 const PolicyParams& params);

McGradient mc_gradient_hae(const EnvModel& env, const PolicyParams& params,
                           const ValueTables& tables, const GAEConfig& cfg, int n_samples,
                           const CounterRng& rng, double c_keep = 0.0);

}  // namespace hiper
