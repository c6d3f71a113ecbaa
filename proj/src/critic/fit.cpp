#include <bit>
#include <stdexcept>

#include "hiper/core/rng.hpp"
#include "hiper/core/segments.hpp"
#include "hiper/critic/critic.hpp"

namespace hiper {

std::size_t CriticDataset::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = splitmix64(k.cell);
  h = splitmix64(h ^ k.reward_bits);
  h = splitmix64(h ^ k.discount_bits);
  return static_cast<std::size_t>(splitmix64(h ^ k.next_code));
}

CriticDataset::CriticDataset(int states, int subgoals, int slices, double gamma)
    : states_(states),
      subgoals_(subgoals),
      slices_(slices),
      gamma_(gamma),
      layout_(states, subgoals, slices),
      flat_layout_(states, slices) {
  check_gamma(gamma);
}

void CriticDataset::insert(std::vector<Sample>& samples, Index& index, const Sample& s) {
  const Key key{s.cell, std::bit_cast<std::uint64_t>(s.reward),
                std::bit_cast<std::uint64_t>(s.discount),
                s.next_cell * 4 + static_cast<std::size_t>(s.next)};
  auto [it, fresh] = index.try_emplace(key, samples.size());
  if (fresh) {
    samples.push_back(s);
  } else {
    samples[it->second].weight += s.weight;
  }
}

void CriticDataset::add(const Trajectory& traj, double weight) {
  if (!(weight >= 0.0)) throw std::invalid_argument("sample weight must be non-negative");
  const int T = traj.length();
  const std::vector<SegmentView> segs = segment_views(traj, gamma_);
  const bool terminal = traj.terminated();

  // Bootstrap cell of V_high at boundary b.
  auto high_next = [&](int b, Sample& s) {
    if (b == T && terminal) {
      s.next = NextTable::kNone;
    } else {
      const StateId sb = b < T ? traj.turns[b].state : traj.next_state(T - 1);
      s.next = NextTable::kHigh;
      s.next_cell = layout_.high_index(sb, b);
    }
  };

  for (const SegmentView& seg : segs) {
    Sample hs;
    hs.cell = layout_.high_index(traj.turns[seg.begin].state, seg.begin);
    hs.reward = seg.macro_reward;
    hs.discount = seg.discount;
    hs.weight = weight;
    high_next(seg.end, hs);
    insert(high_, high_index_, hs);

    for (int t = seg.begin; t < seg.end; ++t) {
      const TurnRecord& turn = traj.turns[t];
      Sample ls;
      ls.cell = layout_.low_index(turn.state, turn.subgoal, t);
      ls.reward = turn.reward;
      ls.discount = gamma_;
      ls.weight = weight;
      if (t + 1 == seg.end) {
        high_next(seg.end, ls);
      } else {
        ls.next = NextTable::kLow;
        ls.next_cell = layout_.low_index(traj.turns[t + 1].state, seg.subgoal, t + 1);
      }
      insert(low_, low_index_, ls);
    }
  }

  // A state-only value is not Markov once the subgoal is hidden, so the flat
  // head regresses on the return to the end of the episode.
  double ret = 0.0, disc = 1.0;
  for (int t = T - 1; t >= 0; --t) {
    ret = traj.turns[t].reward + gamma_ * ret;
    disc *= gamma_;
    Sample fs;
    fs.cell = flat_layout_.index(traj.turns[t].state, t);
    fs.reward = ret;
    fs.discount = disc;
    fs.weight = weight;
    if (terminal) {
      fs.next = NextTable::kNone;
    } else {
      fs.next = NextTable::kFlat;
      fs.next_cell = flat_layout_.index(traj.next_state(T - 1), T);
    }
    insert(flat_, flat_index_, fs);
  }
  total_weight_ += weight;
}

namespace {

struct Snapshot {
  std::span<const double> high, low, flat;

  double lookup(const CriticDataset::Sample& s) const {
    switch (s.next) {
      case CriticDataset::NextTable::kHigh: return high[s.next_cell];
      case CriticDataset::NextTable::kLow: return low[s.next_cell];
      case CriticDataset::NextTable::kFlat: return flat[s.next_cell];
      default: return 0.0;
    }
  }
};

struct Errors {
  double mse = 0.0;
  double residual = 0.0;
};

// Accumulates per-cell weighted target means. mse compares each value with
// every target sample; residual only with its cell's mean target.
Errors cell_means(const std::vector<CriticDataset::Sample>& samples,
                  std::span<const double> values, const Snapshot& snap,
                  std::vector<double>& wsum, std::vector<double>& ysum) {
  std::fill(wsum.begin(), wsum.end(), 0.0);
  std::fill(ysum.begin(), ysum.end(), 0.0);
  double sq = 0.0;
  double w = 0.0;
  for (const auto& s : samples) {
    const double y = s.reward + s.discount * snap.lookup(s);
    const double e = values[s.cell] - y;
    sq += s.weight * e * e;
    w += s.weight;
    wsum[s.cell] += s.weight;
    ysum[s.cell] += s.weight * y;
  }
  if (!(w > 0.0)) return {};
  double res = 0.0;
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (wsum[c] > 0.0) {
      const double e = values[c] - ysum[c] / wsum[c];
      res += wsum[c] * e * e;
    }
  }
  return {sq / w, res / w};
}

void step_cells(std::span<double> values, const std::vector<double>& wsum,
                const std::vector<double>& ysum, double lr) {
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (wsum[c] > 0.0) values[c] -= 2.0 * lr * (values[c] - ysum[c] / wsum[c]);
  }
}

void check_options(const CriticFitOptions& opts) {
  if (!(opts.lr > 0.0)) throw std::invalid_argument("critic lr must be positive");
  if (opts.epochs < 0) throw std::invalid_argument("critic epochs must be non-negative");
}

}  // namespace

CriticFit fit_critic(ValueTables tables, const CriticDataset& data,
                     const CriticFitOptions& opts) {
  check_options(opts);
  const ValueTables reference = data.make_tables();
  if (tables.num_states() != reference.num_states() ||
      tables.num_subgoals() != reference.num_subgoals() ||
      tables.num_slices() != reference.num_slices()) {
    throw std::invalid_argument("fit_critic: table dimensions differ from the dataset");
  }
  const ValueTables frozen = tables;
  std::vector<double> hw(tables.high_values().size()), hy(hw.size());
  std::vector<double> lw(tables.low_values().size()), ly(lw.size());

  CriticFit fit;
  for (int epoch = 0; epoch <= opts.epochs; ++epoch) {
    const ValueTables& source = opts.freeze_targets ? frozen : tables;
    // Copy so both heads regress toward targets from the same snapshot.
    const ValueTables snapshot = source;
    const Snapshot snap{snapshot.high_values(), snapshot.low_values(), {}};
    const Errors high = cell_means(data.high_samples(), tables.high_values(), snap, hw, hy);
    const Errors low = cell_means(data.low_samples(), tables.low_values(), snap, lw, ly);
    fit.high_mse.push_back(high.mse);
    fit.low_mse.push_back(low.mse);
    fit.high_residual.push_back(high.residual);
    fit.low_residual.push_back(low.residual);
    if (epoch == opts.epochs) break;
    step_cells(tables.high_values(), hw, hy, opts.lr);
    step_cells(tables.low_values(), lw, ly, opts.lr);
  }
  fit.tables = std::move(tables);
  return fit;
}

FlatCriticFit fit_flat_critic(FlatValueTable table, const CriticDataset& data,
                              const CriticFitOptions& opts) {
  check_options(opts);
  const FlatValueTable reference = data.make_flat_table();
  if (table.num_states() != reference.num_states() ||
      table.num_slices() != reference.num_slices()) {
    throw std::invalid_argument("fit_flat_critic: table dimensions differ from the dataset");
  }
  const FlatValueTable frozen = table;
  std::vector<double> w(table.values().size()), y(w.size());
  FlatCriticFit fit;
  for (int epoch = 0; epoch <= opts.epochs; ++epoch) {
    const FlatValueTable snapshot = opts.freeze_targets ? frozen : table;
    const Snapshot snap{{}, {}, snapshot.values()};
    const Errors e = cell_means(data.flat_samples(), table.values(), snap, w, y);
    fit.mse.push_back(e.mse);
    fit.residual.push_back(e.residual);
    if (epoch == opts.epochs) break;
    step_cells(table.values(), w, y, opts.lr);
  }
  fit.table = std::move(table);
  return fit;
}

}  // namespace hiper
