#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hiper/core/types.hpp"

namespace hiper {

// Two-head critic V_high(s) and V_low(s, o). With slices > 1 each head is also
// indexed by the turn t in [0, slices): under a finite horizon the return
// from s depends on how many turns remain, so exact baselines need t.
// slices == 1 gives the plain stationary tables and ignores t.
class ValueTables {
 public:
  ValueTables() = default;
  ValueTables(int states, int subgoals, int slices = 1);

  int num_states() const { return states_; }
  int num_subgoals() const { return subgoals_; }
  int num_slices() const { return slices_; }

  double high(StateId s, int t) const { return high_[high_index(s, t)]; }
  double& high(StateId s, int t) { return high_[high_index(s, t)]; }
  double low(StateId s, SubgoalId o, int t) const { return low_[low_index(s, o, t)]; }
  double& low(StateId s, SubgoalId o, int t) { return low_[low_index(s, o, t)]; }

  std::size_t high_index(StateId s, int t) const;
  std::size_t low_index(StateId s, SubgoalId o, int t) const;
  int slice(int t) const;

  std::span<double> high_values() { return high_; }
  std::span<const double> high_values() const { return high_; }
  std::span<double> low_values() { return low_; }
  std::span<const double> low_values() const { return low_; }

 private:
  int states_ = 0;
  int subgoals_ = 0;
  int slices_ = 1;
  std::vector<double> high_;
  std::vector<double> low_;
};

// State-only baseline for flat GAE, time-sliced like ValueTables.
class FlatValueTable {
 public:
  FlatValueTable() = default;
  FlatValueTable(int states, int slices = 1);

  int num_states() const { return states_; }
  int num_slices() const { return slices_; }
  double value(StateId s, int t) const { return v_[index(s, t)]; }
  double& value(StateId s, int t) { return v_[index(s, t)]; }
  std::size_t index(StateId s, int t) const;

  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }

 private:
  int states_ = 0;
  int slices_ = 1;
  std::vector<double> v_;
};

// Bootstrap value after turn t: V_high at the next boundary for a segment-final
// turn, V_low(s_{t+1}, o_k) inside a segment, 0 after a terminal step.
double v_next(const Trajectory& traj, const std::vector<int>& boundaries,
              const ValueTables& tables, int t);
double v_next(const Trajectory& traj, const ValueTables& tables, int t);

// y_high[k] = r~_k + g~_k V_high(s_{b_{k+1}})
std::vector<double> high_targets(const Trajectory& traj, const ValueTables& tables,
                                 double gamma);
// y_low[t] = r_t + gamma v_next(t)
std::vector<double> low_targets(const Trajectory& traj, const ValueTables& tables,
                                double gamma);

double flat_v_next(const Trajectory& traj, const FlatValueTable& flat, int t);
// y_flat[t] = G_t, bootstrapped with V_flat(s_T) after a truncation
std::vector<double> flat_targets(const Trajectory& traj, const FlatValueTable& flat,
                                 double gamma);

// Weighted regression samples for the critics. Samples that share a cell, a
// reward, a discount and a bootstrap cell are merged, so a fully enumerated
// trajectory distribution can be fitted with its exact probabilities.
class CriticDataset {
 public:
  enum class NextTable : std::uint8_t { kNone, kHigh, kLow, kFlat };

  struct Sample {
    std::size_t cell = 0;
    double reward = 0.0;
    double discount = 0.0;
    NextTable next = NextTable::kNone;
    std::size_t next_cell = 0;
    double weight = 0.0;
  };

  CriticDataset(int states, int subgoals, int slices, double gamma);

  void add(const Trajectory& traj, double weight = 1.0);

  const std::vector<Sample>& high_samples() const { return high_; }
  const std::vector<Sample>& low_samples() const { return low_; }
  const std::vector<Sample>& flat_samples() const { return flat_; }
  double total_weight() const { return total_weight_; }

  ValueTables make_tables() const { return ValueTables(states_, subgoals_, slices_); }
  FlatValueTable make_flat_table() const { return FlatValueTable(states_, slices_); }

 private:
  struct Key {
    std::size_t cell;
    std::uint64_t reward_bits;
    std::uint64_t discount_bits;
    std::size_t next_code;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  using Index = std::unordered_map<Key, std::size_t, KeyHash>;

  void insert(std::vector<Sample>& samples, Index& index, const Sample& s);

  int states_;
  int subgoals_;
  int slices_;
  double gamma_;
  ValueTables layout_;
  FlatValueTable flat_layout_;
  std::vector<Sample> high_, low_, flat_;
  Index high_index_, low_index_, flat_index_;
  double total_weight_ = 0.0;
};

struct CriticFitOptions {
  double lr = 0.1;
  int epochs = 100;
  // Regress toward targets computed once from the starting tables instead of
  // recomputing them after every epoch.
  bool freeze_targets = false;
};

struct CriticFit {
  ValueTables tables;
  // Weighted mean squared residual per head, measured before each epoch and
  // once more after the last one (epochs + 1 entries).
  std::vector<double> high_mse;
  std::vector<double> low_mse;
  // The part of the MSE a table step can remove: squared distance of each
  // cell from its mean target, weighted by the cell's sample mass.
  std::vector<double> high_residual;
  std::vector<double> low_residual;
};

struct FlatCriticFit {
  FlatValueTable table;
  std::vector<double> mse;
  std::vector<double> residual;
};

// Tabular regression: every cell takes the step v <- v - 2 lr (v - ybar), ybar
// the weighted mean of its targets, i.e. gradient descent on each cell's mean
// squared error. lr = 0.5 jumps straight to ybar.
CriticFit fit_critic(ValueTables tables, const CriticDataset& data,
                     const CriticFitOptions& opts);
FlatCriticFit fit_flat_critic(FlatValueTable table, const CriticDataset& data,
                              const CriticFitOptions& opts);

void save_critic(std::ostream& out, const ValueTables& tables);
ValueTables load_critic(std::istream& in);
void save_flat_critic(std::ostream& out, const FlatValueTable& table);
FlatValueTable load_flat_critic(std::istream& in);

void save_critic_file(const std::string& path, const ValueTables& tables);
ValueTables load_critic_file(const std::string& path);
void save_flat_critic_file(const std::string& path, const FlatValueTable& table);
FlatValueTable load_flat_critic_file(const std::string& path);

}  // namespace hiper
