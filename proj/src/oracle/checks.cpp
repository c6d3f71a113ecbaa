#include "hiper/oracle/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <tuple>

#include "hiper/core/segments.hpp"
#include "hiper/hae/hae.hpp"
#include "hiper/oracle/enumerate.hpp"
#include "hiper/oracle/gradient.hpp"
#include "hiper/oracle/values.hpp"
#include "hiper/policy/policy.hpp"
#include "hiper/trainer/losses.hpp"

namespace hiper {

Trajectory random_trajectory(std::mt19937_64& eng, const RandomTrajectorySpec& spec) {
  std::uniform_int_distribution<int> len(1, spec.max_length);
  std::uniform_int_distribution<int> state(0, spec.states - 1);
  std::uniform_int_distribution<int> subgoal(0, spec.subgoals - 1);
  std::uniform_int_distribution<int> action(0, 3);
  std::uniform_real_distribution<double> reward(-5.0, 10.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Trajectory traj;
  const int T = len(eng);
  for (int t = 0; t < T; ++t) {
    TurnRecord turn;
    turn.t = t;
    turn.state = state(eng);
    if (t > 0) turn.prev_subgoal = traj.turns[t - 1].subgoal;
    const bool sw = t == 0 || unit(eng) < spec.p_switch;
    turn.q = sw ? Switch::kSwitch : Switch::kKeep;
    turn.subgoal = sw ? subgoal(eng) : *turn.prev_subgoal;
    turn.action = action(eng);
    turn.reward = reward(eng);
    turn.raw_reward = turn.reward;
    BehaviorRecord b;
    b.beta = t > 0 ? unit(eng) : 1.0;
    turn.behavior = b;
    traj.turns.push_back(turn);
  }
  traj.turns.back().done = unit(eng) < spec.p_done;
  traj.truncated = !traj.turns.back().done;
  traj.final_state = state(eng);
  return traj;
}

ValueTables random_tables(std::mt19937_64& eng, int states, int subgoals, int slices) {
  std::uniform_real_distribution<double> v(-5.0, 5.0);
  ValueTables tables(states, subgoals, slices);
  for (double& x : tables.high_values()) x = v(eng);
  for (double& x : tables.low_values()) x = v(eng);
  return tables;
}

PolicyParams random_params(std::mt19937_64& eng, const PolicyShape& shape, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  PolicyParams p(shape);
  for (double& x : p.values()) x = n(eng);
  return p;
}

PolicyParams staged_fetch_params(const FetchChain& env, int n_options, double sharpness) {
  if (n_options < 2) throw std::invalid_argument("staged_fetch_params needs two subgoals");
  PolicyParams p(policy_shape_for(env, n_options));
  const int L = env.length();
  for (StateId s = 0; s < env.num_states(); ++s) {
    if (env.is_terminal(s)) continue;
    const int stage = env.carrying(s) ? 1 : 0;
    const int pos = env.position(s);
    p.subgoal_row(s)[stage] = sharpness;
    for (int o = 0; o < n_options; ++o) {
      p.switch_row(s, o)[o == stage ? 0 : 1] = sharpness;
      ActionId a;
      if (o == 1) {
        a = pos == 0 ? FetchChain::kDrop : FetchChain::kLeft;
      } else {
        a = pos == L - 1 ? FetchChain::kPickup : FetchChain::kRight;
      }
      p.action_row(s, o)[a] = sharpness;
    }
  }
  return p;
}

namespace {

// V_high at boundary b, with b == T meaning the post-episode state.
double boundary_value(const Trajectory& traj, const ValueTables& tables, int b) {
  const int T = traj.length();
  if (b < T) return tables.high(traj.turns[b].state, b);
  if (traj.terminated()) return 0.0;
  return tables.high(*traj.final_state, T);
}

}  // namespace

double telescoped_low(const Trajectory& traj, const ValueTables& tables, double gamma, int t) {
  const std::vector<int> b = segment_boundaries(traj);
  const int end = b[segment_of(b, t) + 1];
  double sum = 0.0;
  for (int l = t; l < end; ++l) sum += std::pow(gamma, l - t) * traj.turns[l].reward;
  const TurnRecord& turn = traj.turns[t];
  return sum + std::pow(gamma, end - t) * boundary_value(traj, tables, end) -
         tables.low(turn.state, turn.subgoal, t);
}

double telescoped_high(const Trajectory& traj, const ValueTables& tables, double gamma, int k) {
  const std::vector<int> b = segment_boundaries(traj);
  const int start = b.at(k);
  const int T = traj.length();
  double g = 0.0;
  for (int l = start; l < T; ++l) g += std::pow(gamma, l - start) * traj.turns[l].reward;
  return g + std::pow(gamma, T - start) * boundary_value(traj, tables, T) -
         tables.high(traj.turns[start].state, start);
}

SwitchExactnessReport switch_exactness_check(const EnvModel& env, const PolicyParams& params,
                                             double gamma) {
  const int H = env.horizon();
  const OracleValues ov = oracle_values(env, params, gamma, H);
  SwitchExactnessReport rep;
  std::set<std::tuple<int, int, int, int>> seen;
  for_each_trajectory(env, params, H, [&](const Trajectory& traj, double) {
    const std::vector<double> a = switch_advantages(traj, ov.tables, params);
    for (int t = 1; t < traj.length(); ++t) {
      const TurnRecord& turn = traj.turns[t];
      const int q = as_int(turn.q);
      const double truth = ov.true_switch_advantage(t, turn.state, *turn.prev_subgoal, q);
      rep.max_deviation = std::max(rep.max_deviation, std::abs(a[t - 1] - truth));
      ++rep.occurrences;
      seen.emplace(t, turn.state, *turn.prev_subgoal, q);
    }
  });
  rep.contexts = static_cast<int>(seen.size());
  return rep;
}

TelescopeReport telescope_check(int trials, std::uint64_t seed, bool include_switching,
                                double tolerance) {
  std::mt19937_64 eng(splitmix64(seed ^ 0x7e1e5c09eULL));
  std::uniform_real_distribution<double> gam(0.5, 1.0);
  std::bernoulli_distribution coin(0.5);
  TelescopeReport rep;
  rep.trials = trials;
  rep.tolerance = tolerance;
  const PolicyParams unused(PolicyShape{1, 1, 1});
  for (int i = 0; i < trials; ++i) {
    RandomTrajectorySpec spec;
    const Trajectory traj = random_trajectory(eng, spec);
    const int slices = coin(eng) ? spec.max_length + 1 : 1;
    const ValueTables tables = random_tables(eng, spec.states, spec.subgoals, slices);
    GAEConfig cfg{coin(eng) ? 1.0 : gam(eng), 1.0, 1.0, 1.0, Whitening::kOff};
    const std::vector<int> b = segment_boundaries(traj);
    const std::vector<double> a_low =
        low_advantages(low_td_residuals(traj, tables, cfg.gamma), b, cfg);
    const HighAdvantages a_high = high_advantages(traj, tables, cfg);
    for (int t = 0; t < traj.length(); ++t) {
      rep.max_dev_low =
          std::max(rep.max_dev_low, std::abs(a_low[t] - telescoped_low(traj, tables, cfg.gamma, t)));
      ++rep.low_checked;
    }
    for (std::size_t k = 0; k + 1 < b.size(); ++k) {
      rep.max_dev_high = std::max(
          rep.max_dev_high,
          std::abs(a_high.advantages[k] -
                   telescoped_high(traj, tables, cfg.gamma, static_cast<int>(k))));
      ++rep.high_checked;
    }
  }
  if (include_switching) {
    const FetchChain env(3, 6);
    const PolicyParams params = random_params(eng, policy_shape_for(env, 2));
    rep.switching = switch_exactness_check(env, params, 1.0);
  }
  return rep;
}

UnbiasednessReport unbiasedness_check(int n_samples, std::uint64_t seed,
                                      bool record_learned_bias) {
  const FetchChain env(3, 6);
  std::mt19937_64 eng(splitmix64(seed ^ 0x0b1a5ULL));
  // Softer logits keep the six-step success path frequent enough that the
  // sample standard error sees it.
  const PolicyParams params = random_params(eng, policy_shape_for(env, 2), 0.5);
  const OracleValues ov = oracle_values(env, params, 1.0, env.horizon());
  UnbiasednessReport rep;
  rep.samples = n_samples;
  rep.oracle = oracle_gradient(env, params, 1.0, env.horizon());
  const GAEConfig cfg{1.0, 1.0, 1.0, 1.0, Whitening::kOff};
  McGradient mc = mc_gradient_hae(env, params, ov.tables, cfg, n_samples, CounterRng(seed));
  rep.mean = mc.mean;
  rep.std_error = mc.std_error;
  auto o = rep.oracle.values();
  auto m = rep.mean.values();
  auto se = rep.std_error.values();
  rep.coordinates = static_cast<int>(o.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double diff = std::abs(m[i] - o[i]);
    norm += o[i] * o[i];
    rep.max_abs_diff = std::max(rep.max_abs_diff, diff);
    if (se[i] > 0.0) {
      rep.max_z = std::max(rep.max_z, diff / se[i]);
      if (diff > 4.0 * se[i]) ++rep.failures;
    } else if (diff > 1e-9) {
      ++rep.failures;
      ++rep.zero_se_failures;
    }
  }
  rep.oracle_norm = std::sqrt(norm);

  if (record_learned_bias) {
    CriticDataset data(env.num_states(), 2, env.horizon() + 1, 1.0);
    const CounterRng fit_rng(splitmix64(seed ^ 0xf17ULL));
    for (int e = 0; e < 2000; ++e) data.add(rollout(env, params, env.horizon(), fit_rng, e, 0.0));
    const ValueTables learned =
        fit_critic(data.make_tables(), data, CriticFitOptions{0.5, 50, false}).tables;
    const GAEConfig gae{1.0, 0.95, 0.95, 0.95, Whitening::kOff};
    const McGradient lm = mc_gradient_hae(env, params, learned, gae, n_samples,
                                          CounterRng(splitmix64(seed ^ 0x1ea7ULL)));
    double max_z = 0.0, max_bias = 0.0;
    auto lv = lm.mean.values();
    auto ls = lm.std_error.values();
    for (std::size_t i = 0; i < o.size(); ++i) {
      const double bias = std::abs(lv[i] - o[i]);
      max_bias = std::max(max_bias, bias);
      if (ls[i] > 0.0) max_z = std::max(max_z, bias / ls[i]);
    }
    rep.learned_max_z = max_z;
    rep.learned_max_abs_bias = max_bias;
  }
  return rep;
}

VarianceCheckReport variance_check(int n_samples, const std::vector<std::uint64_t>& seeds,
                                   int bootstrap) {
  VarianceCheckReport rep;
  rep.seeds = seeds;
  rep.strict_passed = true;
  const GAEConfig cfg{1.0, 1.0, 1.0, 1.0, Whitening::kOff};
  VarianceOptions opts;
  opts.bootstrap = bootstrap;

  const FetchChain env(3, 6);
  for (std::uint64_t seed : seeds) {
    std::mt19937_64 eng(splitmix64(seed ^ 0x5a2ULL));
    const PolicyParams params = random_params(eng, policy_shape_for(env, 2));
    const OracleValues ov = oracle_values(env, params, 1.0, env.horizon());
    const int H = env.horizon();
    // Both advantages have mean zero at every turn, so second moments are variances.
    std::vector<double> mass(H, 0.0), m_low(H, 0.0), m_flat(H, 0.0);
    for_each_trajectory(env, params, H, [&](const Trajectory& traj, double p) {
      const HierarchicalAdvantages a = estimate_all(traj, ov.tables, params, cfg, &ov.flat);
      for (int t = 0; t < traj.length(); ++t) {
        mass[t] += p;
        m_low[t] += p * a.low[t] * a.low[t];
        m_flat[t] += p * (*a.flat)[t] * (*a.flat)[t];
      }
    });
    for (int t = 0; t < H; ++t) {
      if (mass[t] <= 0.0) continue;
      rep.exact_low.push_back(m_low[t] / mass[t]);
      rep.exact_flat.push_back(m_flat[t] / mass[t]);
      const VarianceReport vr = variance_report(env, params, ov.tables, ov.flat, cfg, t,
                                                n_samples, CounterRng(seed), opts);
      if (!(vr.ci_diff.hi <= 0.0)) rep.strict_passed = false;
      rep.strict.push_back(vr);
    }
  }

  // Subgoal-independent rewards and a single decision: no information in o and
  // no bootstrap, so the two estimators coincide.
  const OneStep flat_env({0.0, 10.0});
  std::mt19937_64 eng(splitmix64(seeds.empty() ? 0 : seeds.front()));
  PolicyParams params = random_params(eng, policy_shape_for(flat_env, 2));
  for (int o = 1; o < 2; ++o) {
    auto src = params.action_row(0, 0);
    auto dst = params.action_row(0, o);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  const OracleValues ov = oracle_values(flat_env, params, 1.0, 1);
  rep.equality = variance_report(flat_env, params, ov.tables, ov.flat, cfg, 0, n_samples,
                                 CounterRng(seeds.empty() ? 0 : seeds.front()), opts);
  rep.equality_overlap = rep.equality.ci_low.overlaps(rep.equality.ci_flat);
  return rep;
}

bool close_relative(double a, double b, double rel, double abs_floor) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

namespace {

constexpr double kFdStep = 1e-5;

bool near_clip_edge(const std::vector<TrainingTurn>& turns, const PolicyParams& live,
                    double eps) {
  auto near = [&](double r) {
    return std::abs(r - (1.0 - eps)) < 1e-4 || std::abs(r - (1.0 + eps)) < 1e-4;
  };
  for (const TrainingTurn& tt : turns) {
    const PpoRatios r = ppo_ratios(live, tt.turn);
    if (near(r.r_low) || (r.r_switch && near(*r.r_switch)) || (r.r_high && near(*r.r_high))) {
      return true;
    }
    const double joint = r.r_low * r.r_high.value_or(1.0) * r.r_switch.value_or(1.0);
    if (near(joint)) return true;
  }
  return false;
}

template <typename F>
void fd_over(std::span<double> x, std::span<const double> analytic, F f, long& coords,
             int& failures, double& max_err) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + kFdStep;
    const double fp = f();
    x[i] = orig - kFdStep;
    const double fm = f();
    x[i] = orig;
    const double fd = (fp - fm) / (2.0 * kFdStep);
    ++coords;
    max_err = std::max(max_err, std::abs(fd - analytic[i]));
    if (!close_relative(analytic[i], fd)) ++failures;
  }
}

}  // namespace

GradcheckReport gradcheck(int configurations, std::uint64_t seed, int oracle_configurations) {
  GradcheckReport rep;
  rep.configurations = configurations;
  const FetchChain env(3, 4);
  const PolicyShape shape = policy_shape_for(env, 2);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int c = 0; c < configurations; ++c) {
    std::mt19937_64 eng(splitmix64(seed ^ (0x9c0ULL + static_cast<std::uint64_t>(c))));
    const PolicyParams behavior = random_params(eng, shape);
    const PolicyParams ref = random_params(eng, shape);
    const double c_keep = unit(eng) < 0.5 ? 0.0 : 0.3;
    const CounterRng rng(eng());
    std::vector<Trajectory> batch;
    for (int e = 0; e < 3; ++e) batch.push_back(rollout(env, behavior, env.horizon(), rng, e, c_keep));
    ValueTables tables = random_tables(eng, env.num_states(), 2, env.horizon() + 1);
    FlatValueTable flat(env.num_states(), env.horizon() + 1);
    for (double& v : flat.values()) v = 5.0 * (2.0 * unit(eng) - 1.0);
    const GAEConfig gae{0.9 + 0.1 * unit(eng), 0.95, 0.95, 0.95, Whitening::kOff};
    const std::vector<HierarchicalAdvantages> adv =
        estimate_batch(batch, tables, behavior, gae, &flat);
    std::vector<TrainingTurn> turns = make_training_turns(batch, adv, tables, gae.gamma);
    {
      std::vector<std::vector<double>> a_flat;
      for (const auto& a : adv) a_flat.push_back(*a.flat);
      const std::vector<TrainingTurn> ft = make_flat_training_turns(batch, a_flat, flat, gae.gamma);
      for (std::size_t i = 0; i < turns.size(); ++i) {
        turns[i].a_flat = ft[i].a_flat;
        turns[i].y_flat = ft[i].y_flat;
      }
    }
    const LossWeights w{0.2, 0.5, 0.01 + unit(eng)};

    PolicyParams live = behavior;
    for (int attempt = 0;; ++attempt) {
      live = behavior;
      for (double& x : live.values()) x += noise(eng);
      if (!near_clip_edge(turns, live, w.clip_eps) || attempt > 100) break;
    }

    // Per-turn log-density gradients.
    for (const TrainingTurn& tt : turns) {
      const GradTables g = grad_log_prob(live, tt.turn);
      PolicyParams probe = live;
      fd_over(probe.values(), g.values(),
              [&] { return log_prob(probe, tt.turn).total(); }, rep.logprob_coords,
              rep.logprob_failures, rep.max_logprob_err);
    }

    // Hierarchical total loss: policy logits and both critic heads.
    const TotalLoss loss = total_loss(live, ref, tables, turns, w);
    {
      PolicyParams probe = live;
      fd_over(probe.values(), loss.actor_grad.values(),
              [&] { return total_loss(probe, ref, tables, turns, w).value; }, rep.loss_coords,
              rep.loss_failures, rep.max_loss_err);
      ValueTables tprobe = tables;
      fd_over(tprobe.high_values(), loss.critic_grad.high_values(),
              [&] { return total_loss(live, ref, tprobe, turns, w).value; }, rep.loss_coords,
              rep.loss_failures, rep.max_loss_err);
      fd_over(tprobe.low_values(), loss.critic_grad.low_values(),
              [&] { return total_loss(live, ref, tprobe, turns, w).value; }, rep.loss_coords,
              rep.loss_failures, rep.max_loss_err);
    }

    // Flat baseline loss.
    const FlatTotalLoss floss = flat_total_loss(live, ref, flat, turns, w);
    {
      PolicyParams probe = live;
      fd_over(probe.values(), floss.actor_grad.values(),
              [&] { return flat_total_loss(probe, ref, flat, turns, w).value; }, rep.loss_coords,
              rep.loss_failures, rep.max_loss_err);
      FlatValueTable fprobe = flat;
      fd_over(fprobe.values(), floss.critic_grad.values(),
              [&] { return flat_total_loss(live, ref, fprobe, turns, w).value; },
              rep.loss_coords, rep.loss_failures, rep.max_loss_err);
    }
  }

  // Exact gradient of the enumerated objective.
  rep.oracle_configurations = oracle_configurations;
  for (int c = 0; c < oracle_configurations; ++c) {
    std::mt19937_64 eng(splitmix64(seed ^ (0x0aacULL + static_cast<std::uint64_t>(c))));
    const PolicyParams params = random_params(eng, shape);
    const double gamma = 0.8 + 0.2 * unit(eng);
    const double c_keep = c % 2 == 0 ? 0.0 : 0.3;
    const GradTables exact = oracle_gradient(env, params, gamma, env.horizon(), c_keep);
    PolicyParams probe = params;
    long coords = 0;
    int before = rep.oracle_failures;
    fd_over(probe.values(), exact.values(),
            [&] { return expected_return(env, probe, gamma, env.horizon(), c_keep); }, coords,
            rep.oracle_failures, rep.max_oracle_err);
    (void)before;
  }

  // Score identity on the larger enumerable chain.
  {
    const FetchChain big(3, 6);
    std::mt19937_64 eng(splitmix64(seed ^ 0x5c0eULL));
    const PolicyParams params = random_params(eng, policy_shape_for(big, 2));
    rep.score_identity_max = expected_score(big, params, big.horizon()).max_abs();
  }
  return rep;
}

CriticFixpointReport critic_fixpoint_check(std::uint64_t seed, int max_epochs, double lr,
                                           double tolerance) {
  const FetchChain env(3, 6);
  const int H = env.horizon();
  std::mt19937_64 eng(splitmix64(seed ^ 0xc41cULL));
  const PolicyParams params = random_params(eng, policy_shape_for(env, 2));
  const double gamma = 1.0;
  const OracleValues ov = oracle_values(env, params, gamma, H);
  CriticDataset data(env.num_states(), 2, H + 1, gamma);
  for_each_trajectory(env, params, H, [&](const Trajectory& traj, double p) { data.add(traj, p); });

  CriticFixpointReport rep;
  rep.tolerance = tolerance;
  ValueTables tables = data.make_tables();
  FlatValueTable flat = data.make_flat_table();
  const CriticFitOptions one{lr, 1, false};
  double prev_total = std::numeric_limits<double>::infinity();
  double prev_flat = std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    CriticFit fit = fit_critic(std::move(tables), data, one);
    tables = std::move(fit.tables);
    FlatCriticFit ffit = fit_flat_critic(std::move(flat), data, one);
    flat = std::move(ffit.table);
    const double total = fit.high_residual.front() + fit.low_residual.front();
    if (total > prev_total * (1.0 + 1e-12)) rep.monotone = false;
    if (ffit.residual.front() > prev_flat * (1.0 + 1e-12)) rep.monotone = false;
    prev_total = total;
    prev_flat = ffit.residual.front();

    double sh = 0.0, sl = 0.0, sf = 0.0;
    for (int t = 0; t < H; ++t) {
      for (int s = 0; s < env.num_states(); ++s) {
        if (ov.high_defined(s, t)) sh = std::max(sh, std::abs(tables.high(s, t) - ov.tables.high(s, t)));
        if (ov.flat_defined(s, t)) sf = std::max(sf, std::abs(flat.value(s, t) - ov.flat.value(s, t)));
        for (int o = 0; o < 2; ++o) {
          if (ov.low_defined(s, o, t)) {
            sl = std::max(sl, std::abs(tables.low(s, o, t) - ov.tables.low(s, o, t)));
          }
        }
      }
    }
    rep.sup_high = sh;
    rep.sup_low = sl;
    rep.sup_flat = sf;
    rep.epochs_run = epoch;
    if (!rep.converged_epoch && sh <= tolerance && sl <= tolerance) rep.converged_epoch = epoch;
    if (!rep.flat_converged_epoch && sf <= tolerance) rep.flat_converged_epoch = epoch;
  }
  return rep;
}

}  // namespace hiper
