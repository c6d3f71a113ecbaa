#include "hiper/policy/tables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hiper {

LogitTables::LogitTables(PolicyShape shape) : shape_(shape) {
  if (shape.states < 1 || shape.subgoals < 1 || shape.actions < 1) {
    throw std::invalid_argument("policy tables need at least one state, subgoal and action");
  }
  values_.assign(shape.total(), 0.0);
}

void LogitTables::check_state(StateId s) const {
  if (s < 0 || s >= shape_.states) {
    throw std::out_of_range("state " + std::to_string(s) + " outside policy tables");
  }
}

void LogitTables::check_subgoal(SubgoalId o) const {
  if (o < 0 || o >= shape_.subgoals) {
    throw std::out_of_range("subgoal " + std::to_string(o) + " outside policy tables");
  }
}

void LogitTables::check_action(ActionId a) const {
  if (a < 0 || a >= shape_.actions) {
    throw std::out_of_range("action " + std::to_string(a) + " outside policy tables");
  }
}

std::span<double> LogitTables::switch_row(StateId s, SubgoalId o_prev) {
  check_state(s);
  check_subgoal(o_prev);
  return std::span<double>(values_).subspan((s * shape_.subgoals + o_prev) * 2, 2);
}

std::span<const double> LogitTables::switch_row(StateId s, SubgoalId o_prev) const {
  return const_cast<LogitTables*>(this)->switch_row(s, o_prev);
}

std::span<double> LogitTables::subgoal_row(StateId s) {
  check_state(s);
  return std::span<double>(values_).subspan(shape_.switch_size() + s * shape_.subgoals,
                                            shape_.subgoals);
}

std::span<const double> LogitTables::subgoal_row(StateId s) const {
  return const_cast<LogitTables*>(this)->subgoal_row(s);
}

std::span<double> LogitTables::action_row(StateId s, SubgoalId o) {
  check_state(s);
  check_subgoal(o);
  const std::size_t off = shape_.switch_size() + shape_.subgoal_size() +
                          (static_cast<std::size_t>(s) * shape_.subgoals + o) * shape_.actions;
  return std::span<double>(values_).subspan(off, shape_.actions);
}

std::span<const double> LogitTables::action_row(StateId s, SubgoalId o) const {
  return const_cast<LogitTables*>(this)->action_row(s, o);
}

GradTables& GradTables::operator+=(const GradTables& other) {
  add_scaled(other, 1.0);
  return *this;
}

GradTables& GradTables::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

void GradTables::add_scaled(const GradTables& other, double c) {
  if (!(other.shape() == shape_)) throw std::invalid_argument("gradient shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += c * other.values_[i];
}

double GradTables::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void apply_step(PolicyParams& params, const GradTables& grad, double step) {
  if (!(params.shape() == grad.shape())) throw std::invalid_argument("gradient shape mismatch");
  auto p = params.values();
  auto g = grad.values();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += step * g[i];
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    z += out[i];
  }
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] /= z;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  softmax_into(logits, p);
  return p;
}

double log_softmax_at(std::span<const double> logits, int index) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - m);
  return logits[index] - m - std::log(z);
}

}  // namespace hiper
