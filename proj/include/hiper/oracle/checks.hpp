#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "hiper/core/env.hpp"
#include "hiper/critic/critic.hpp"
#include "hiper/oracle/statistics.hpp"
#include "hiper/policy/tables.hpp"

namespace hiper {

// Random corpora for identity checks.
struct RandomTrajectorySpec {
  int states = 7;
  int subgoals = 3;
  int max_length = 12;
  double p_switch = 0.4;
  double p_done = 0.5;
};

Trajectory random_trajectory(std::mt19937_64& eng, const RandomTrajectorySpec& spec);
// FetchChain policy whose subgoal is the task stage (0 fetch, 1 return): it
// switches exactly when the stage changes and then walks to the object or
// home. Every preferred entry gets logit `sharpness`, the rest 0.
PolicyParams staged_fetch_params(const FetchChain& env, int n_options, double sharpness);

ValueTables random_tables(std::mt19937_64& eng, int states, int subgoals, int slices);
PolicyParams random_params(std::mt19937_64& eng, const PolicyShape& shape, double scale = 1.0);

// Closed forms written as explicit sums, independent of the recursive estimators.
// Low: sum_{l=t}^{b-1} gamma^(l-t) r_l + gamma^(b-t) V_high(s_b) - V_low(s_t, o_t).
double telescoped_low(const Trajectory& traj, const ValueTables& tables, double gamma, int t);
// High: G_{b_k} + gamma^(T-b_k) V_high(s_T) - V_high(s_{b_k}); the middle term
// vanishes when the episode terminates.
double telescoped_high(const Trajectory& traj, const ValueTables& tables, double gamma, int k);

struct SwitchExactnessReport {
  long occurrences = 0;
  int contexts = 0;
  double max_deviation = 0.0;
};

// Compares A_switch on every enumerated trajectory with the exact
// Q_switch - V_switch of its (t, s, o_prev, q) context, using oracle tables.
SwitchExactnessReport switch_exactness_check(const EnvModel& env, const PolicyParams& params,
                                             double gamma);

struct TelescopeReport {
  int trials = 0;
  long low_checked = 0;
  long high_checked = 0;
  double max_dev_low = 0.0;
  double max_dev_high = 0.0;
  double tolerance = 1e-10;
  std::optional<SwitchExactnessReport> switching;

  bool passed_low() const { return max_dev_low <= tolerance; }
  bool passed_high() const { return max_dev_high <= tolerance; }
  bool passed_switch() const { return !switching || switching->max_deviation <= tolerance; }
  bool passed() const { return passed_low() && passed_high() && passed_switch(); }
};

// lambda_low = lambda_high = 1 on random trajectories and random tables; with
// include_switching, also switching exactness on FetchChain(3,6).
TelescopeReport telescope_check(int trials, std::uint64_t seed, bool include_switching = true,
                                double tolerance = 1e-10);

struct UnbiasednessReport {
  int samples = 0;
  int coordinates = 0;
  int failures = 0;
  // Failures on coordinates the sample never moved (zero standard error).
  int zero_se_failures = 0;
  double max_z = 0.0;
  double max_abs_diff = 0.0;
  double oracle_norm = 0.0;
  GradTables oracle;
  GradTables mean;
  GradTables std_error;
  // Same estimator with lambda = 0.95 and critic tables fitted on a sample:
  // recorded only, the estimator is biased there by design.
  std::optional<double> learned_max_z;
  std::optional<double> learned_max_abs_bias;

  bool passed() const { return failures == 0; }
};

// FetchChain(3,6), |O| = 2, random theta, oracle tables, lambda = 1, gamma = 1.
UnbiasednessReport unbiasedness_check(int n_samples, std::uint64_t seed,
                                      bool record_learned_bias = false);

struct VarianceCheckReport {
  std::vector<std::uint64_t> seeds;
  std::vector<VarianceReport> strict;  // seeds x reachable turns
  // Population variances of the same advantages by enumeration, one pair per
  // strict row.
  std::vector<double> exact_low, exact_flat;
  VarianceReport equality;
  bool strict_passed = false;
  bool equality_overlap = false;

  bool passed() const { return strict_passed && equality_overlap; }
};

VarianceCheckReport variance_check(int n_samples, const std::vector<std::uint64_t>& seeds,
                                   int bootstrap = 1000);

// |a - b| <= rel * max(|a|, |b|) + abs_floor
bool close_relative(double a, double b, double rel = 1e-6, double abs_floor = 1e-9);

struct GradcheckReport {
  int configurations = 0;
  long logprob_coords = 0;
  long loss_coords = 0;
  int logprob_failures = 0;
  int loss_failures = 0;
  double max_logprob_err = 0.0;  // max |analytic - fd|
  double max_loss_err = 0.0;
  int oracle_configurations = 0;
  int oracle_failures = 0;
  double max_oracle_err = 0.0;
  double score_identity_max = 0.0;

  bool passed() const {
    return logprob_failures == 0 && loss_failures == 0 && oracle_failures == 0 &&
           score_identity_max <= 1e-10;
  }
};

GradcheckReport gradcheck(int configurations, std::uint64_t seed, int oracle_configurations = 3);

struct CriticFixpointReport {
  int epochs_run = 0;
  std::optional<int> converged_epoch;       // hierarchical heads within tolerance
  std::optional<int> flat_converged_epoch;  // flat head within tolerance
  double sup_high = 0.0;
  double sup_low = 0.0;
  double sup_flat = 0.0;
  bool monotone = true;  // reducible residual never increased between epochs
  double tolerance = 1e-3;

  bool passed() const { return converged_epoch.has_value() && flat_converged_epoch.has_value(); }
};

// Frozen random policy on FetchChain(3,6); regression on the exact trajectory
// distribution, compared with oracle values on defined cells.
CriticFixpointReport critic_fixpoint_check(std::uint64_t seed, int max_epochs = 500,
                                           double lr = 0.1, double tolerance = 1e-3);

}  // namespace hiper
