#include "hiper/oracle/gradient.hpp"

#include <cmath>
#include <stdexcept>

#include "hiper/policy/policy.hpp"

namespace hiper {

double expected_return(const EnvModel& env, const PolicyParams& params, double gamma,
                       int horizon, double c_keep, const EnumerationLimits& limits) {
  double j = 0.0;
  for_each_trajectory(
      env, params, horizon,
      [&](const Trajectory& traj, double p) {
        double ret = 0.0;
        for (int t = traj.length() - 1; t >= 0; --t) ret = traj.turns[t].reward + gamma * ret;
        j += p * ret;
      },
      c_keep, limits);
  return j;
}

GradTables oracle_gradient(const EnvModel& env, const PolicyParams& params, double gamma,
                           int horizon, double c_keep, const EnumerationLimits& limits) {
  GradTables grad(params.shape());
  for_each_trajectory(
      env, params, horizon,
      [&](const Trajectory& traj, double p) {
        double ret = 0.0;
        for (int t = traj.length() - 1; t >= 0; --t) ret = traj.turns[t].reward + gamma * ret;
        const double w = p * ret;
        if (w == 0.0) return;
        for (const TurnRecord& turn : traj.turns) {
          accumulate_score(params, turn, HeadWeights{w, w, w}, grad);
        }
      },
      c_keep, limits);
  return grad;
}

GradTables expected_score(const EnvModel& env, const PolicyParams& params, int horizon,
                          const EnumerationLimits& limits) {
  GradTables grad(params.shape());
  for_each_trajectory(
      env, params, horizon,
      [&](const Trajectory& traj, double p) {
        for (const TurnRecord& turn : traj.turns) {
          accumulate_score(params, turn, HeadWeights{p, p, p}, grad);
        }
      },
      0.0, limits);
  return grad;
}

GradTables finite_difference_gradient(const std::function<double(const PolicyParams&)>& f,
                                      const PolicyParams& params, double h) {
  GradTables grad(params.shape());
  PolicyParams probe = params;
  auto x = probe.values();
  auto g = grad.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(probe);
    x[i] = orig - h;
    const double fm = f(probe);
    x[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

GradTables hae_gradient_estimate(const Trajectory& traj, const HierarchicalAdvantages& adv,
                                 const PolicyParams& params) {
  GradTables g(params.shape());
  for (const TurnRecord& turn : traj.turns) {
    HeadWeights w;
    w.w_switch = adv.switch_at(turn.t).value_or(0.0);
    w.w_high = adv.high_at(turn.t).value_or(0.0);
    w.w_low = adv.low[turn.t];
    accumulate_score(params, turn, w, g);
  }
  return g;
}

McGradient mc_gradient_hae(const EnvModel& env, const PolicyParams& params,
                           const ValueTables& tables, const GAEConfig& cfg, int n_samples,
                           const CounterRng& rng, double c_keep) {
  if (n_samples < 1) throw std::invalid_argument("mc_gradient_hae needs N >= 1");
  GAEConfig raw = cfg;
  raw.whiten = Whitening::kOff;
  McGradient out{GradTables(params.shape()), GradTables(params.shape()), n_samples};
  // Welford running mean and squared deviations per coordinate.
  auto mean = out.mean.values();
  auto m2 = out.std_error.values();
  for (int i = 0; i < n_samples; ++i) {
    const Trajectory traj = rollout(env, params, env.horizon(), rng, i, c_keep);
    const HierarchicalAdvantages adv = estimate_all(traj, tables, params, raw);
    const GradTables g = hae_gradient_estimate(traj, adv, params);
    auto gv = g.values();
    const double n = i + 1;
    for (std::size_t j = 0; j < gv.size(); ++j) {
      const double d = gv[j] - mean[j];
      mean[j] += d / n;
      m2[j] += d * (gv[j] - mean[j]);
    }
  }
  const double n = n_samples;
  for (double& v : m2) v = n > 1 ? std::sqrt(v / (n - 1) / n) : 0.0;
  return out;
}

}  // namespace hiper
