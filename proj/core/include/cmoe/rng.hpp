#pragma once

#include <cmath>
#include <cstdint>

namespace cmoe {

/// Counter-based splitmix64 stream. Output i depends only on (seed, i), so
/// the stream is splittable and datasets sampled from it are reproducible
/// byte for byte on any platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1), both ends excluded.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  /// Standard normal via Box-Muller; consumes two words per draw.
  double normal() {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  /// Laplace with the given mean and scale b.
  double laplace(double mean, double scale) {
    const double u = uniform_open() - 0.5;
    const double mag = std::log1p(-2.0 * std::abs(u));
    return mean + (u < 0.0 ? scale * mag : -scale * mag);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

inline std::uint64_t mix_u64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Deterministic per-(n, trial) seed derivation for sweeps.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return mix_u64(mix_u64(mix_u64(base) ^ a) ^ b);
}

}  // namespace cmoe
