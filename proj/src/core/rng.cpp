#include "hiper/core/rng.hpp"

namespace hiper {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t stream, std::uint64_t turn,
                               std::uint64_t head) const {
  std::uint64_t h = splitmix64(seed_);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ (turn * 0x100000001b3ULL));
  return splitmix64(h ^ (head + 0x51ed270b27ULL));
}

double CounterRng::uniform(std::uint64_t stream, std::uint64_t turn, std::uint64_t head) const {
  return static_cast<double>(bits(stream, turn, head) >> 11) * 0x1.0p-53;
}

std::mt19937_64 CounterRng::engine(std::uint64_t purpose) const {
  return std::mt19937_64(bits(~0ULL, purpose, 0xe17ULL));
}

int sample_index(std::span<const double> probs, double u) {
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  // Rounding left u past the last cumulative sum; return the last positive entry.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace hiper
