#include <stdexcept>
#include <string>

#include "hiper/critic/critic.hpp"

namespace hiper {

namespace {

void check_dims(int states, int subgoals, int slices) {
  if (states < 1 || subgoals < 1 || slices < 1) {
    throw std::invalid_argument("value tables need positive dimensions");
  }
}

int resolve_slice(int slices, int t) {
  if (slices == 1) return 0;
  if (t < 0 || t >= slices) {
    throw std::out_of_range("turn " + std::to_string(t) + " outside the critic's " +
                            std::to_string(slices) + " time slices");
  }
  return t;
}

}  // namespace

ValueTables::ValueTables(int states, int subgoals, int slices)
    : states_(states), subgoals_(subgoals), slices_(slices) {
  check_dims(states, subgoals, slices);
  high_.assign(static_cast<std::size_t>(slices) * states, 0.0);
  low_.assign(static_cast<std::size_t>(slices) * states * subgoals, 0.0);
}

int ValueTables::slice(int t) const { return resolve_slice(slices_, t); }

std::size_t ValueTables::high_index(StateId s, int t) const {
  if (s < 0 || s >= states_) {
    throw std::out_of_range("critic: state " + std::to_string(s) + " out of range");
  }
  return static_cast<std::size_t>(slice(t)) * states_ + s;
}

std::size_t ValueTables::low_index(StateId s, SubgoalId o, int t) const {
  if (o < 0 || o >= subgoals_) {
    throw std::out_of_range("critic: subgoal " + std::to_string(o) + " out of range");
  }
  return high_index(s, t) * subgoals_ + o;
}

FlatValueTable::FlatValueTable(int states, int slices) : states_(states), slices_(slices) {
  check_dims(states, 1, slices);
  v_.assign(static_cast<std::size_t>(slices) * states, 0.0);
}

std::size_t FlatValueTable::index(StateId s, int t) const {
  if (s < 0 || s >= states_) {
    throw std::out_of_range("flat critic: state " + std::to_string(s) + " out of range");
  }
  return static_cast<std::size_t>(resolve_slice(slices_, t)) * states_ + s;
}

}  // namespace hiper
