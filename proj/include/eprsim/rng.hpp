#pragma once

#include <cstdint>

namespace eprsim {

// Counter-based generator: every (seed, index) pair opens an independent,
// reproducible stream, so ensemble members can be evaluated in any order
// (or in parallel) without changing the numbers drawn.
class CounterRng {
 public:
  static CounterRng at(std::uint64_t seed, std::uint64_t index) {
    // two rounds of splitmix folding keep seed/index decorrelated
    CounterRng r;
    r.state_ = mix(seed + 0x9e3779b97f4a7c15ull * (index + 1));
    r.state_ = mix(r.state_ ^ mix(index + 0xbf58476d1ce4e5b9ull));
    return r;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  /// Uniform double in [0, 1).
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_ = 0;
};

}  // namespace eprsim
