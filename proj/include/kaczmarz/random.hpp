#pragma once

#include <cstdint>
#include <random>

#include "kaczmarz/dense.hpp"

namespace kaczmarz {

/// SplitMix64 finalizer, used to decorrelate nearby seeds before they reach the
/// Mersenne Twister state.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Per-trial seed: seed XOR trial index. Trials are independent of execution
/// order because each one builds its own generator from this value.
constexpr std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) { return seed ^ trial; }

/// Seedable, splittable generator on top of mt19937_64.
///
/// `split(stream)` derives a child from the construction seed only, never from
/// the parent's consumed state, so children are stable no matter how much the
/// parent has been used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  Rng split(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    // Lemire-style rejection keeps the result exactly uniform.
    const std::uint64_t bound = n;
    const std::uint64_t limit = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      const unsigned __int128 prod = static_cast<unsigned __int128>(r) * bound;
      if (static_cast<std::uint64_t>(prod) >= limit) return static_cast<std::size_t>(prod >> 64);
    }
  }

  double normal() { return normal_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline Vector gaussian_vector(std::size_t n, Rng& rng) {
  Vector out(n);
  for (double& v : out) v = rng.normal();
  return out;
}

/// Uniform on the unit sphere in R^n.
inline Vector random_unit_vector(std::size_t n, Rng& rng) {
  for (;;) {
    Vector v = gaussian_vector(n, rng);
    const double len = norm2(v);
    if (len > 1e-300) {
      for (double& x : v) x /= len;
      return v;
    }
  }
}

}  // namespace kaczmarz
