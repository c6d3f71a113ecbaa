#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "hiper/core/env.hpp"
#include "hiper/core/rng.hpp"
#include "hiper/critic/critic.hpp"
#include "hiper/policy/tables.hpp"
#include "hiper/trainer/config.hpp"
#include "hiper/trainer/losses.hpp"

namespace hiper {

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainState {
  PolicyParams params;     // live theta
  PolicyParams behavior;   // theta_old, refreshed at the start of every iteration
  PolicyParams reference;  // initial snapshot for the KL penalty
  ValueTables critic;
  int iteration = 0;
};

struct SwitchStats {
  double mean_segments = 0.0;
  double mean_seg_len = 0.0;  // total turns / total segments
  double switch_rate = 0.0;   // fraction of turns t >= 1 that SWITCH
  double mean_length = 0.0;
};

SwitchStats switching_stats(std::span<const Trajectory> batch);

// Success is judged on the raw reward of the final step.
bool succeeded(const Trajectory& traj, const EnvModel& env);

enum class EvalMode { kGreedy, kSample };

struct EvalResult {
  int episodes = 0;
  double success_rate = 0.0;
  double mean_return = 0.0;  // raw, undiscounted
  SwitchStats stats;
};

EvalResult evaluate(const PolicyParams& params, const EnvModel& env, int episodes,
                    EvalMode mode, std::uint64_t seed = 0);

struct MetricsRow {
  int iter = 0;
  double mean_return = 0.0;  // greedy evaluation after the update
  double success = 0.0;      // greedy evaluation after the update
  double mean_segments = 0.0;  // training batch
  double mean_seg_len = 0.0;   // training batch
  double switch_rate = 0.0;    // training batch
  double actor_loss = 0.0;     // -L_actor, averaged over minibatches
  double critic_loss = 0.0;
  double kl = 0.0;
  double mean_episode_length = 0.0;  // training batch; not written to CSV
};

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const MetricsRow& row);

struct TrainHooks {
  std::function<void(const MetricsRow&)> on_iteration;
  std::function<void(int, const PolicyParams&)> on_checkpoint;
};

struct TrainResult {
  PolicyParams params;
  ValueTables critic;
  std::vector<MetricsRow> metrics;
  // First iteration whose greedy success rate reached 0.9.
  std::optional<int> first_success_iter;
};

struct FlatTrainResult {
  PolicyParams params;
  FlatValueTable critic;
  std::vector<MetricsRow> metrics;
  std::optional<int> first_success_iter;
};

struct UpdateStats {
  double actor = 0.0;
  double critic = 0.0;
  double kl = 0.0;
  int steps = 0;
};

// Runs cfg.epochs passes of shuffled minibatch descent on the total loss.
// The turns (advantages and targets) are read-only.
UpdateStats ppo_update(TrainState& state, std::span<const TrainingTurn> turns,
                       const PPOConfig& cfg, std::mt19937_64& shuffle);

TrainState initial_state(const PPOConfig& cfg, const EnvModel& env, int n_options);

TrainResult train(const PPOConfig& cfg, const EnvModel& env, int n_options,
                  const TrainHooks& hooks = {});
FlatTrainResult train_flat_baseline(const PPOConfig& cfg, const EnvModel& env, int n_options,
                                    const TrainHooks& hooks = {});

}  // namespace hiper
