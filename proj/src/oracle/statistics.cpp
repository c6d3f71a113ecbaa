#include "hiper/oracle/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hiper/policy/policy.hpp"

namespace hiper {

double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

namespace {

Interval percentile_interval(std::vector<double> draws, double confidence) {
  std::sort(draws.begin(), draws.end());
  const double alpha = 1.0 - confidence;
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(draws.size() - 1);
    const std::size_t i = static_cast<std::size_t>(std::floor(pos));
    const std::size_t j = std::min(i + 1, draws.size() - 1);
    return draws[i] + (pos - static_cast<double>(i)) * (draws[j] - draws[i]);
  };
  return {at(alpha / 2.0), at(1.0 - alpha / 2.0)};
}

}  // namespace

VarianceReport variance_report(const EnvModel& env, const PolicyParams& params,
                               const ValueTables& tables, const FlatValueTable& flat,
                               const GAEConfig& cfg, int t, int n_samples,
                               const CounterRng& rng, const VarianceOptions& opts) {
  if (t < 0 || t >= env.horizon()) {
    throw UnreachableTurn("turn " + std::to_string(t) + " is beyond the horizon");
  }
  if (n_samples < 2) throw std::invalid_argument("variance_report needs N >= 2");
  if (opts.bootstrap < 1) throw std::invalid_argument("bootstrap count must be >= 1");
  GAEConfig raw = cfg;
  raw.whiten = Whitening::kOff;

  VarianceReport rep;
  rep.t = t;
  std::vector<double> a_low, a_flat;
  a_low.reserve(n_samples);
  a_flat.reserve(n_samples);
  const long max_attempts = static_cast<long>(n_samples) * opts.max_attempts_per_sample;
  for (long ep = 0; static_cast<int>(a_low.size()) < n_samples; ++ep) {
    if (ep >= max_attempts) {
      throw UnreachableTurn("turn " + std::to_string(t) + " reached by " +
                            std::to_string(a_low.size()) + " of " + std::to_string(ep) +
                            " episodes");
    }
    ++rep.attempts;
    const Trajectory traj = rollout(env, params, env.horizon(), rng, ep, opts.c_keep);
    if (traj.length() <= t) continue;
    const HierarchicalAdvantages adv = estimate_all(traj, tables, params, raw, &flat);
    a_low.push_back(adv.low[t]);
    a_flat.push_back((*adv.flat)[t]);
  }
  rep.samples = n_samples;
  rep.var_low = sample_variance(a_low);
  rep.var_flat = sample_variance(a_flat);
  rep.diff = rep.var_low - rep.var_flat;

  std::mt19937_64 eng = rng.engine(0x7a11ULL + static_cast<std::uint64_t>(t));
  std::uniform_int_distribution<int> pick(0, n_samples - 1);
  std::vector<double> bl(n_samples), bf(n_samples);
  std::vector<double> dl, df, dd;
  for (int b = 0; b < opts.bootstrap; ++b) {
    for (int i = 0; i < n_samples; ++i) {
      const int j = pick(eng);
      bl[i] = a_low[j];
      bf[i] = a_flat[j];
    }
    const double vl = sample_variance(bl);
    const double vf = sample_variance(bf);
    dl.push_back(vl);
    df.push_back(vf);
    dd.push_back(vl - vf);
  }
  rep.ci_low = percentile_interval(dl, opts.confidence);
  rep.ci_flat = percentile_interval(df, opts.confidence);
  rep.ci_diff = percentile_interval(dd, opts.confidence);
  return rep;
}

}  // namespace hiper
