#include "hiper/hae/hae.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hiper/core/segments.hpp"
#include "hiper/policy/policy.hpp"

namespace hiper {

void GAEConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0,1]");
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument(std::string(name) + " must lie in [0,1]");
    }
  };
  unit(lambda_low, "lambda_low");
  unit(lambda_high, "lambda_high");
  unit(lambda_flat, "lambda_flat");
}

std::vector<double> low_td_residuals(const Trajectory& traj, const ValueTables& tables,
                                     double gamma) {
  check_gamma(gamma);
  const std::vector<int> b = segment_boundaries(traj);
  std::vector<double> delta(traj.turns.size());
  for (int t = 0; t < traj.length(); ++t) {
    const TurnRecord& turn = traj.turns[t];
    delta[t] = turn.reward + gamma * v_next(traj, b, tables, t) -
               tables.low(turn.state, turn.subgoal, t);
  }
  return delta;
}

std::vector<double> low_advantages(std::span<const double> deltas,
                                   std::span<const int> boundaries, const GAEConfig& cfg) {
  if (boundaries.size() < 2 || boundaries.front() != 0 ||
      boundaries.back() != static_cast<int>(deltas.size())) {
    throw std::invalid_argument("low_advantages: boundaries do not span the residuals");
  }
  const double decay = cfg.gamma * cfg.lambda_low;
  std::vector<double> adv(deltas.size());
  for (std::size_t k = boundaries.size() - 1; k-- > 0;) {
    double acc = 0.0;
    for (int t = boundaries[k + 1] - 1; t >= boundaries[k]; --t) {
      acc = deltas[t] + decay * acc;
      adv[t] = acc;
    }
  }
  return adv;
}

HighAdvantages high_advantages(const Trajectory& traj, const ValueTables& tables,
                               const GAEConfig& cfg) {
  const std::vector<SegmentView> segs = segment_views(traj, cfg.gamma);
  const std::vector<double> y = high_targets(traj, tables, cfg.gamma);
  HighAdvantages out;
  out.deltas.resize(segs.size());
  out.advantages.resize(segs.size());
  for (std::size_t k = 0; k < segs.size(); ++k) {
    out.deltas[k] = y[k] - tables.high(traj.turns[segs[k].begin].state, segs[k].begin);
  }
  double acc = 0.0;
  for (std::size_t k = segs.size(); k-- > 0;) {
    acc = out.deltas[k] + segs[k].discount * cfg.lambda_high * acc;
    out.advantages[k] = acc;
  }
  return out;
}

std::vector<double> switch_advantages(const Trajectory& traj, const ValueTables& tables,
                                      const PolicyParams& params) {
  std::vector<double> adv;
  adv.reserve(traj.turns.size());
  for (int t = 1; t < traj.length(); ++t) {
    const TurnRecord& turn = traj.turns[t];
    const SubgoalId o_prev = traj.turns[t - 1].subgoal;
    const double beta =
        turn.behavior ? turn.behavior->beta : switch_prob(params, turn.state, o_prev);
    const double gain = tables.high(turn.state, t) - tables.low(turn.state, o_prev, t);
    adv.push_back((as_int(turn.q) - beta) * gain);
  }
  return adv;
}

std::vector<double> flat_gae(const Trajectory& traj, const FlatValueTable& flat,
                             const GAEConfig& cfg) {
  check_gamma(cfg.gamma);
  const double decay = cfg.gamma * cfg.lambda_flat;
  std::vector<double> adv(traj.turns.size());
  double acc = 0.0;
  for (int t = traj.length() - 1; t >= 0; --t) {
    const TurnRecord& turn = traj.turns[t];
    const double delta =
        turn.reward + cfg.gamma * flat_v_next(traj, flat, t) - flat.value(turn.state, t);
    acc = delta + decay * acc;
    adv[t] = acc;
  }
  return adv;
}

std::optional<double> HierarchicalAdvantages::switch_at(int t) const {
  if (t < 1 || t > static_cast<int>(switch_.size())) return std::nullopt;
  return switch_[t - 1];
}

std::optional<double> HierarchicalAdvantages::high_at(int t) const {
  for (std::size_t k = 0; k + 1 < boundaries.size(); ++k) {
    if (boundaries[k] == t) return high[k];
    if (boundaries[k] > t) break;
  }
  return std::nullopt;
}

namespace {

HierarchicalAdvantages estimate_raw(const Trajectory& traj, const ValueTables& tables,
                                    const PolicyParams& params, const GAEConfig& cfg,
                                    const FlatValueTable* flat) {
  HierarchicalAdvantages out;
  out.boundaries = segment_boundaries(traj);
  out.low = low_advantages(low_td_residuals(traj, tables, cfg.gamma), out.boundaries, cfg);
  out.high = high_advantages(traj, tables, cfg).advantages;
  out.switch_ = switch_advantages(traj, tables, params);
  if (flat) out.flat = flat_gae(traj, *flat, cfg);
  return out;
}

template <typename Get>
void whiten_level(std::span<HierarchicalAdvantages> batch, Get get) {
  double n = 0.0, sum = 0.0;
  for (auto& a : batch) {
    if (auto* v = get(a)) {
      for (double x : *v) sum += x;
      n += static_cast<double>(v->size());
    }
  }
  if (n == 0.0) return;
  const double mean = sum / n;
  double ss = 0.0;
  for (auto& a : batch) {
    if (auto* v = get(a)) {
      for (double x : *v) ss += (x - mean) * (x - mean);
    }
  }
  const double sd = std::sqrt(ss / n);
  const double scale = sd > 1e-12 ? 1.0 / sd : 1.0;
  for (auto& a : batch) {
    if (auto* v = get(a)) {
      for (double& x : *v) x = (x - mean) * scale;
    }
  }
}

}  // namespace

void whiten_per_level(std::span<HierarchicalAdvantages> batch) {
  whiten_level(batch, [](HierarchicalAdvantages& a) { return &a.low; });
  whiten_level(batch, [](HierarchicalAdvantages& a) { return &a.high; });
  whiten_level(batch, [](HierarchicalAdvantages& a) { return &a.switch_; });
  whiten_level(batch, [](HierarchicalAdvantages& a) -> std::vector<double>* {
    return a.flat ? &*a.flat : nullptr;
  });
}

HierarchicalAdvantages estimate_all(const Trajectory& traj, const ValueTables& tables,
                                    const PolicyParams& params, const GAEConfig& cfg,
                                    const FlatValueTable* flat) {
  cfg.validate();
  HierarchicalAdvantages out = estimate_raw(traj, tables, params, cfg, flat);
  if (cfg.whiten == Whitening::kPerLevel) whiten_per_level(std::span(&out, 1));
  return out;
}

std::vector<HierarchicalAdvantages> estimate_batch(std::span<const Trajectory> batch,
                                                   const ValueTables& tables,
                                                   const PolicyParams& params,
                                                   const GAEConfig& cfg,
                                                   const FlatValueTable* flat) {
  cfg.validate();
  std::vector<HierarchicalAdvantages> out;
  out.reserve(batch.size());
  for (const Trajectory& traj : batch) out.push_back(estimate_raw(traj, tables, params, cfg, flat));
  if (cfg.whiten == Whitening::kPerLevel) whiten_per_level(out);
  return out;
}

}  // namespace hiper
