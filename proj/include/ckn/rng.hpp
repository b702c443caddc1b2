#pragma once

// Deterministic RNG used by random profile generation and the test
// batteries. SplitMix64 with explicit double construction, so streams are
// identical across toolchains (libstdc++ distributions are not).

#include <cstdint>

namespace ckn {

struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) { return int(next_u64() % std::uint64_t(n)); }
};

}  // namespace ckn
