#pragma once

#include <span>
#include <vector>

#include "hiper/core/types.hpp"

namespace hiper {

struct PolicyShape {
  int states = 0;
  int subgoals = 0;
  int actions = 0;

  std::size_t switch_size() const { return static_cast<std::size_t>(states) * subgoals * 2; }
  std::size_t subgoal_size() const { return static_cast<std::size_t>(states) * subgoals; }
  std::size_t action_size() const {
    return static_cast<std::size_t>(states) * subgoals * actions;
  }
  std::size_t total() const { return switch_size() + subgoal_size() + action_size(); }

  bool operator==(const PolicyShape&) const = default;
};

// Three row-major blocks in one buffer: switch[s, o_prev, {KEEP,SWITCH}],
// subgoal[s, o], action[s, o, a].
class LogitTables {
 public:
  LogitTables() = default;
  explicit LogitTables(PolicyShape shape);

  const PolicyShape& shape() const { return shape_; }

  std::span<double> switch_row(StateId s, SubgoalId o_prev);
  std::span<const double> switch_row(StateId s, SubgoalId o_prev) const;
  std::span<double> subgoal_row(StateId s);
  std::span<const double> subgoal_row(StateId s) const;
  std::span<double> action_row(StateId s, SubgoalId o);
  std::span<const double> action_row(StateId s, SubgoalId o) const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  void check_state(StateId s) const;
  void check_subgoal(SubgoalId o) const;
  void check_action(ActionId a) const;

 protected:
  PolicyShape shape_;
  std::vector<double> values_;
};

// Logits of the three heads. Zero-initialized tables are the uniform policy.
class PolicyParams : public LogitTables {
 public:
  using LogitTables::LogitTables;
};

// Same layout as PolicyParams; holds d/dtheta of some scalar.
class GradTables : public LogitTables {
 public:
  using LogitTables::LogitTables;

  GradTables& operator+=(const GradTables& other);
  GradTables& operator*=(double c);
  void add_scaled(const GradTables& other, double c);
  double max_abs() const;
};

// theta += step * grad
void apply_step(PolicyParams& params, const GradTables& grad, double step);

// Numerically stable softmax with an explicit renormalization.
std::vector<double> softmax(std::span<const double> logits);
void softmax_into(std::span<const double> logits, std::span<double> out);
double log_softmax_at(std::span<const double> logits, int index);

}  // namespace hiper
