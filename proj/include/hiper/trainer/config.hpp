#pragma once

#include <cstdint>
#include <string>

#include "hiper/hae/hae.hpp"

namespace hiper {

struct PPOConfig {
  double clip_eps = 0.2;
  double c_v = 0.5;
  double kl_beta = 0.01;
  double lr_actor = 0.5;
  double lr_critic = 0.1;
  int epochs = 4;
  int minibatch = 64;
  int iterations = 300;
  int episodes_per_iter = 32;
  int eval_episodes = 10;
  double c_keep = 0.3;
  GAEConfig gae{0.99, 0.95, 0.95, 0.95, Whitening::kPerLevel};
  // Fitted-iteration sweeps of the critic on each fresh batch, before the PPO epochs.
  int critic_epochs = 20;
  // Index critic tables by turn as well as state.
  bool critic_time_index = true;
  // Write checkpoints every N iterations (0 disables).
  int checkpoint_every = 0;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct EnvSpec {
  std::string name = "fetchchain";
  int length = 5;
  int horizon = 20;
  int n_options = 2;

  void validate() const;
};

}  // namespace hiper
