#include "hiper/core/env.hpp"

#include <algorithm>
#include <stdexcept>

namespace hiper {

FetchChain::FetchChain(int length, int horizon) : length_(length), horizon_(horizon) {
  if (length < 2) throw std::invalid_argument("FetchChain needs L >= 2");
  if (horizon < 1) throw std::invalid_argument("FetchChain needs H >= 1");
}

std::string FetchChain::name() const {
  return "fetchchain(L=" + std::to_string(length_) + ",H=" + std::to_string(horizon_) + ")";
}

std::vector<std::pair<StateId, double>> FetchChain::initial_distribution() const {
  return {{encode(0, false), 1.0}};
}

void FetchChain::check_state(StateId s) const {
  if (s < 0 || s >= num_states()) {
    throw std::invalid_argument("FetchChain: unknown state " + std::to_string(s));
  }
}

StateId FetchChain::encode(int position, bool carrying) const {
  if (position < 0 || position >= length_) {
    throw std::invalid_argument("FetchChain: position out of range");
  }
  return (carrying ? length_ : 0) + position;
}

int FetchChain::position(StateId s) const {
  check_state(s);
  return is_terminal(s) ? 0 : s % length_;
}

bool FetchChain::carrying(StateId s) const {
  check_state(s);
  return !is_terminal(s) && s >= length_;
}

std::string FetchChain::describe_state(StateId s) const {
  if (is_terminal(s)) return "terminal";
  return "p=" + std::to_string(position(s)) + (carrying(s) ? ",carrying" : ",empty");
}

StepResult FetchChain::step(StateId s, ActionId a) const {
  check_state(s);
  if (a < 0 || a >= num_actions()) {
    throw std::invalid_argument("FetchChain: unknown action " + std::to_string(a));
  }
  if (is_terminal(s)) throw std::invalid_argument("FetchChain: step from terminal state");
  const int p = position(s);
  const bool c = carrying(s);
  switch (a) {
    case kLeft:
      return {encode(std::max(p - 1, 0), c), 0.0, false};
    case kRight:
      return {encode(std::min(p + 1, length_ - 1), c), 0.0, false};
    case kPickup:
      if (p == length_ - 1 && !c) return {encode(p, true), 0.0, false};
      return {s, kInvalidPenalty, false};
    default:
      if (p == 0 && c) return {terminal_state(), kGoalReward, true};
      return {s, kInvalidPenalty, false};
  }
}

OneStep::OneStep(std::vector<double> action_rewards) : rewards_(std::move(action_rewards)) {
  if (rewards_.empty()) throw std::invalid_argument("OneStep needs at least one action");
}

StepResult OneStep::step(StateId s, ActionId a) const {
  if (s != 0) throw std::invalid_argument("OneStep: only state 0 is live");
  if (a < 0 || a >= num_actions()) {
    throw std::invalid_argument("OneStep: unknown action " + std::to_string(a));
  }
  return {1, rewards_[a], true};
}

double OneStep::success_reward() const {
  return *std::max_element(rewards_.begin(), rewards_.end());
}

std::unique_ptr<EnvModel> make_env(const std::string& name, int length, int horizon) {
  if (name == "fetchchain") return std::make_unique<FetchChain>(length, horizon);
  if (name == "onestep") {
    return std::make_unique<OneStep>(std::vector<double>(std::max(length, 1), 10.0));
  }
  throw std::invalid_argument("unknown env '" + name + "'");
}

}  // namespace hiper
