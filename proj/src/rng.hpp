#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sandhi {

// Deterministic random source. mt19937_64 output is pinned by the standard;
// every derived draw below is spelled out here rather than delegated to
// std::*_distribution, whose sequences vary across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive, by rejection.
  uint64_t uniform_int(uint64_t lo, uint64_t hi) {
    const uint64_t span = hi - lo + 1;  // hi >= lo; span == 0 means the full 2^64 range
    if (span == 0) return next_u64();
    const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t draw;
    do {
      draw = next_u64();
    } while (draw >= limit);
    return lo + draw % span;
  }

  // Fisher-Yates, draws span the whole vector so shuffles are reproducible.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform_int(0, i - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// splitmix64 finalizer; used to derive stream seeds from (seed, index) pairs.
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace sandhi
