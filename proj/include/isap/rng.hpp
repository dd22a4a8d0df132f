#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace isap {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// std::mt19937_64 reseeded at the start of every sweep from
/// splitmix64(seed ^ splitmix64(sweep)), so a chain's stream is a pure function
/// of (seed, sweep). Uniforms and bounded integers are derived by hand rather
/// than through <random> distributions so the bits are identical across
/// standard libraries.
class SweepRng {
 public:
  explicit SweepRng(std::uint64_t seed = 0) : seed_(seed) { begin_sweep(0); }

  void begin_sweep(std::uint64_t sweep) { engine_.seed(splitmix64(seed_ ^ splitmix64(sweep))); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n) by rejection (no modulo bias). n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r;
    do r = engine_();
    while (r >= limit);
    return r % n;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace isap
