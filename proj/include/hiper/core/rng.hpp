#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace hiper {

// Stateless counter-based generator: every draw is a pure function of
// (seed, stream, turn, head), so episodes can be generated in any order.
class CounterRng {
 public:
  enum Head : std::uint64_t { kSwitchHead = 0, kSubgoalHead = 1, kActionHead = 2, kInitHead = 3 };

  explicit CounterRng(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t bits(std::uint64_t stream, std::uint64_t turn, std::uint64_t head) const;
  // Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t stream, std::uint64_t turn, std::uint64_t head) const;

  // A conventional engine for bulk work (bootstrap resampling, shuffles), seeded
  // from a derived key so it never overlaps the rollout streams.
  std::mt19937_64 engine(std::uint64_t purpose) const;

 private:
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Inverse-CDF draw from an explicitly normalized probability row.
int sample_index(std::span<const double> probs, double u);

}  // namespace hiper
