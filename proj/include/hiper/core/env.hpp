#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hiper/core/types.hpp"

namespace hiper {

struct StepResult {
  StateId next = 0;
  double reward = 0.0;
  bool done = false;
};

class EnvModel {
 public:
  virtual ~EnvModel() = default;

  virtual std::string name() const = 0;
  virtual int num_states() const = 0;
  virtual int num_actions() const = 0;
  virtual int horizon() const = 0;
  virtual std::vector<std::pair<StateId, double>> initial_distribution() const = 0;
  // Throws std::invalid_argument on an unknown state or action id.
  virtual StepResult step(StateId s, ActionId a) const = 0;
  virtual bool is_terminal(StateId s) const = 0;
  virtual std::string describe_state(StateId s) const { return std::to_string(s); }

  // Reward that marks a successful episode; success is judged on raw reward.
  virtual double success_reward() const = 0;
};

// Corridor of L cells. The agent starts at p=0 empty-handed, must walk to p=L-1,
// PICKUP, walk back and DROP at p=0 for +10.
class FetchChain final : public EnvModel {
 public:
  enum Action : ActionId { kLeft = 0, kRight = 1, kPickup = 2, kDrop = 3 };
  static constexpr double kGoalReward = 10.0;
  static constexpr double kInvalidPenalty = -0.1;

  FetchChain(int length, int horizon);

  std::string name() const override;
  int num_states() const override { return 2 * length_ + 1; }
  int num_actions() const override { return 4; }
  int horizon() const override { return horizon_; }
  std::vector<std::pair<StateId, double>> initial_distribution() const override;
  StepResult step(StateId s, ActionId a) const override;
  bool is_terminal(StateId s) const override { return s == terminal_state(); }
  std::string describe_state(StateId s) const override;
  double success_reward() const override { return kGoalReward; }

  int length() const { return length_; }
  StateId encode(int position, bool carrying) const;
  int position(StateId s) const;
  bool carrying(StateId s) const;
  StateId terminal_state() const { return 2 * length_; }

 private:
  void check_state(StateId s) const;

  int length_;
  int horizon_;
};

// Single decision: one start state, n actions with fixed rewards, then terminal.
class OneStep final : public EnvModel {
 public:
  explicit OneStep(std::vector<double> action_rewards = {10.0, 10.0});

  std::string name() const override { return "onestep"; }
  int num_states() const override { return 2; }
  int num_actions() const override { return static_cast<int>(rewards_.size()); }
  int horizon() const override { return 1; }
  std::vector<std::pair<StateId, double>> initial_distribution() const override {
    return {{0, 1.0}};
  }
  StepResult step(StateId s, ActionId a) const override;
  bool is_terminal(StateId s) const override { return s == 1; }
  double success_reward() const override;

  const std::vector<double>& action_rewards() const { return rewards_; }

 private:
  std::vector<double> rewards_;
};

// Builds "fetchchain" (length, horizon) or "onestep" (length = action count).
std::unique_ptr<EnvModel> make_env(const std::string& name, int length, int horizon);

}  // namespace hiper
