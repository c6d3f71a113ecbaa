#pragma once

#include <stdexcept>
#include <vector>

#include "hiper/core/env.hpp"
#include "hiper/core/rng.hpp"
#include "hiper/critic/critic.hpp"
#include "hiper/hae/hae.hpp"

namespace hiper {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
  double width() const { return hi - lo; }
};

struct VarianceOptions {
  int bootstrap = 1000;
  double confidence = 0.95;
  double c_keep = 0.0;
  // Give up after this many episodes per requested sample when t is rarely reached.
  int max_attempts_per_sample = 1000;
};

struct VarianceReport {
  int t = 0;
  int samples = 0;
  long attempts = 0;
  double var_low = 0.0;
  double var_flat = 0.0;
  double diff = 0.0;  // var_low - var_flat
  Interval ci_low, ci_flat, ci_diff;
};

class UnreachableTurn : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double sample_variance(const std::vector<double>& x);

// Rolls out episodes until n_samples of them reach turn t, then compares the
// sample variances of A_low_t and A_flat_t. Percentile bootstrap over the
// paired samples gives the intervals.
VarianceReport variance_report(const EnvModel& env, const PolicyParams& params,
                               const ValueTables& tables, const FlatValueTable& flat,
                               const GAEConfig& cfg, int t, int n_samples,
                               const CounterRng& rng, const VarianceOptions& opts = {});

}  // namespace hiper
