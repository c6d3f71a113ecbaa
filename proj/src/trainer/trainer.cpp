#include "hiper/trainer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hiper/policy/policy.hpp"

namespace hiper {

void PPOConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument(key + " " + why);
  };
  if (!(clip_eps > 0.0)) fail("clip_eps", "must be positive");
  if (!(c_v >= 0.0)) fail("c_v", "must be non-negative");
  if (!(kl_beta >= 0.0)) fail("kl_beta", "must be non-negative");
  if (!(lr_actor >= 0.0)) fail("lr_actor", "must be non-negative");
  if (!(lr_critic >= 0.0)) fail("lr_critic", "must be non-negative");
  if (epochs < 1) fail("epochs", "must be >= 1");
  if (minibatch < 1) fail("minibatch", "must be >= 1");
  if (iterations < 0) fail("iterations", "must be >= 0");
  if (episodes_per_iter < 1) fail("episodes_per_iter", "must be >= 1");
  if (eval_episodes < 1) fail("eval_episodes", "must be >= 1");
  if (!(c_keep >= 0.0)) fail("c_keep", "must be non-negative");
  if (critic_epochs < 0) fail("critic_epochs", "must be >= 0");
  if (checkpoint_every < 0) fail("checkpoint_every", "must be >= 0");
  gae.validate();
}

void EnvSpec::validate() const {
  if (name != "fetchchain" && name != "onestep") {
    throw std::invalid_argument("env must be fetchchain or onestep, got '" + name + "'");
  }
  if (length < 1 || (name == "fetchchain" && length < 2)) {
    throw std::invalid_argument("env.L out of range");
  }
  if (horizon < 1) throw std::invalid_argument("env.H must be >= 1");
  if (n_options < 1) throw std::invalid_argument("n_options must be >= 1");
}

TrainState initial_state(const PPOConfig& cfg, const EnvModel& env, int n_options) {
  const PolicyShape shape = policy_shape_for(env, n_options);
  TrainState st{PolicyParams(shape), PolicyParams(shape), PolicyParams(shape),
                ValueTables(env.num_states(), n_options,
                            cfg.critic_time_index ? env.horizon() + 1 : 1),
                0};
  return st;
}

namespace {

void check_finite(double v, const char* what, int iter) {
  if (!std::isfinite(v)) {
    throw TrainingDiverged(std::string(what) + " became non-finite at iteration " +
                           std::to_string(iter));
  }
}

LossWeights weights_of(const PPOConfig& cfg) { return {cfg.clip_eps, cfg.c_v, cfg.kl_beta}; }

void descend(std::span<double> values, std::span<const double> grad, double lr) {
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= lr * grad[i];
}

// Shuffled minibatch passes; `step` performs one update on a minibatch.
template <typename Step>
UpdateStats run_epochs(std::size_t n_turns, const PPOConfig& cfg, std::mt19937_64& shuffle,
                       std::span<const TrainingTurn> turns, Step step) {
  UpdateStats stats;
  std::vector<std::size_t> order(n_turns);
  std::iota(order.begin(), order.end(), 0);
  std::vector<TrainingTurn> mb;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle);
    for (std::size_t start = 0; start < n_turns; start += cfg.minibatch) {
      const std::size_t end = std::min(n_turns, start + cfg.minibatch);
      mb.clear();
      for (std::size_t i = start; i < end; ++i) mb.push_back(turns[order[i]]);
      step(std::span<const TrainingTurn>(mb), stats);
      ++stats.steps;
    }
  }
  if (stats.steps > 0) {
    stats.actor /= stats.steps;
    stats.critic /= stats.steps;
    stats.kl /= stats.steps;
  }
  return stats;
}

std::vector<Trajectory> collect(const EnvModel& env, const PolicyParams& behavior,
                                const PPOConfig& cfg, const CounterRng& rng, int iter) {
  std::vector<Trajectory> batch;
  batch.reserve(cfg.episodes_per_iter);
  for (int e = 0; e < cfg.episodes_per_iter; ++e) {
    const std::uint64_t stream = static_cast<std::uint64_t>(iter) * cfg.episodes_per_iter + e;
    batch.push_back(rollout(env, behavior, env.horizon(), rng, stream, cfg.c_keep));
  }
  return batch;
}

CriticFitOptions fit_options(const PPOConfig& cfg) {
  return CriticFitOptions{cfg.lr_critic, cfg.critic_epochs, false};
}

template <typename Result>
void finish_iteration(Result& result, MetricsRow row, const EnvModel& env,
                      const PolicyParams& params, const PPOConfig& cfg, const TrainHooks& hooks,
                      int iter) {
  const EvalResult ev = evaluate(params, env, cfg.eval_episodes, EvalMode::kGreedy, cfg.seed);
  row.mean_return = ev.mean_return;
  row.success = ev.success_rate;
  check_finite(row.actor_loss, "actor loss", iter);
  check_finite(row.critic_loss, "critic loss", iter);
  check_finite(row.kl, "KL", iter);
  if (!result.first_success_iter && row.success >= 0.9) result.first_success_iter = iter;
  result.metrics.push_back(row);
  if (hooks.on_iteration) hooks.on_iteration(row);
  if (hooks.on_checkpoint && cfg.checkpoint_every > 0 && (iter + 1) % cfg.checkpoint_every == 0) {
    hooks.on_checkpoint(iter + 1, params);
  }
}

MetricsRow batch_row(int iter, std::span<const Trajectory> batch, const UpdateStats& up) {
  const SwitchStats st = switching_stats(batch);
  MetricsRow row;
  row.iter = iter;
  row.mean_segments = st.mean_segments;
  row.mean_seg_len = st.mean_seg_len;
  row.switch_rate = st.switch_rate;
  row.mean_episode_length = st.mean_length;
  row.actor_loss = -up.actor;
  row.critic_loss = up.critic;
  row.kl = up.kl;
  return row;
}

}  // namespace

UpdateStats ppo_update(TrainState& state, std::span<const TrainingTurn> turns,
                       const PPOConfig& cfg, std::mt19937_64& shuffle) {
  const LossWeights w = weights_of(cfg);
  return run_epochs(turns.size(), cfg, shuffle, turns,
                    [&](std::span<const TrainingTurn> mb, UpdateStats& stats) {
                      const TotalLoss loss =
                          total_loss(state.params, state.reference, state.critic, mb, w);
                      check_finite(loss.value, "total loss", state.iteration);
                      apply_step(state.params, loss.actor_grad, -cfg.lr_actor);
                      descend(state.critic.high_values(), loss.critic_grad.high_values(),
                              cfg.lr_critic);
                      descend(state.critic.low_values(), loss.critic_grad.low_values(),
                              cfg.lr_critic);
                      stats.actor += loss.actor;
                      stats.critic += loss.critic;
                      stats.kl += loss.kl;
                    });
}

TrainResult train(const PPOConfig& cfg, const EnvModel& env, int n_options,
                  const TrainHooks& hooks) {
  cfg.validate();
  TrainState state = initial_state(cfg, env, n_options);
  const CounterRng rng(cfg.seed);
  TrainResult result;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    state.iteration = iter;
    state.behavior = state.params;
    const std::vector<Trajectory> batch = collect(env, state.behavior, cfg, rng, iter);

    if (cfg.critic_epochs > 0 && cfg.lr_critic > 0.0) {
      CriticDataset data(env.num_states(), n_options, state.critic.num_slices(), cfg.gae.gamma);
      for (const Trajectory& traj : batch) data.add(traj);
      state.critic = fit_critic(std::move(state.critic), data, fit_options(cfg)).tables;
    }
    const std::vector<HierarchicalAdvantages> adv =
        estimate_batch(batch, state.critic, state.behavior, cfg.gae);
    const std::vector<TrainingTurn> turns =
        make_training_turns(batch, adv, state.critic, cfg.gae.gamma);

    std::mt19937_64 shuffle = rng.engine(static_cast<std::uint64_t>(iter));
    const UpdateStats up = ppo_update(state, turns, cfg, shuffle);
    finish_iteration(result, batch_row(iter, batch, up), env, state.params, cfg, hooks, iter);
  }
  result.params = std::move(state.params);
  result.critic = std::move(state.critic);
  return result;
}

FlatTrainResult train_flat_baseline(const PPOConfig& cfg, const EnvModel& env, int n_options,
                                    const TrainHooks& hooks) {
  cfg.validate();
  const PolicyShape shape = policy_shape_for(env, n_options);
  PolicyParams params(shape);
  const PolicyParams reference = params;
  FlatValueTable critic(env.num_states(), cfg.critic_time_index ? env.horizon() + 1 : 1);
  const CounterRng rng(cfg.seed);
  const LossWeights w = weights_of(cfg);
  GAEConfig raw = cfg.gae;
  raw.whiten = Whitening::kOff;

  FlatTrainResult result;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const PolicyParams behavior = params;
    const std::vector<Trajectory> batch = collect(env, behavior, cfg, rng, iter);

    if (cfg.critic_epochs > 0 && cfg.lr_critic > 0.0) {
      CriticDataset data(env.num_states(), n_options, critic.num_slices(), cfg.gae.gamma);
      for (const Trajectory& traj : batch) data.add(traj);
      critic = fit_flat_critic(std::move(critic), data, fit_options(cfg)).table;
    }
    std::vector<std::vector<double>> adv;
    adv.reserve(batch.size());
    for (const Trajectory& traj : batch) adv.push_back(flat_gae(traj, critic, raw));
    if (cfg.gae.whiten == Whitening::kPerLevel) {
      std::vector<HierarchicalAdvantages> wrap(adv.size());
      for (std::size_t i = 0; i < adv.size(); ++i) wrap[i].flat = std::move(adv[i]);
      whiten_per_level(wrap);
      for (std::size_t i = 0; i < adv.size(); ++i) adv[i] = std::move(*wrap[i].flat);
    }
    const std::vector<TrainingTurn> turns =
        make_flat_training_turns(batch, adv, critic, cfg.gae.gamma);

    std::mt19937_64 shuffle = rng.engine(static_cast<std::uint64_t>(iter));
    const UpdateStats up =
        run_epochs(turns.size(), cfg, shuffle, turns,
                   [&](std::span<const TrainingTurn> mb, UpdateStats& stats) {
                     const FlatTotalLoss loss = flat_total_loss(params, reference, critic, mb, w);
                     check_finite(loss.value, "total loss", iter);
                     apply_step(params, loss.actor_grad, -cfg.lr_actor);
                     descend(critic.values(), loss.critic_grad.values(), cfg.lr_critic);
                     stats.actor += loss.actor;
                     stats.critic += loss.critic;
                     stats.kl += loss.kl;
                   });
    finish_iteration(result, batch_row(iter, batch, up), env, params, cfg, hooks, iter);
  }
  result.params = std::move(params);
  result.critic = std::move(critic);
  return result;
}

}  // namespace hiper
