#ifndef SIGPATH_RANDOM_HPP
#define SIGPATH_RANDOM_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "sigpath/error.hpp"

namespace sigpath {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Stateless generator: every variate is a pure function of (seed, stream, counter words),
// so draws can be made in any order or on any thread with identical results.
//
// bits(a, b, c, d) = mix(mix(mix(mix(key ^ a) ^ b) ^ c) ^ d) with key = mix(mix(seed) ^ mix(stream)).
// Gaussians use the Marsaglia polar method; attempt r consumes the uniforms with last
// counter word 2r and 2r + 1.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : key_(mix64(mix64(seed) ^ mix64(~stream))) {}

  std::uint64_t bits(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0, std::uint64_t d = 0) const noexcept {
    std::uint64_t h = mix64(key_ ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return mix64(h ^ d);
  }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0, std::uint64_t d = 0) const noexcept {
    return (static_cast<double>(bits(a, b, c, d) >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    for (std::uint64_t r = 0; r < 256; ++r) {
      const double u = 2.0 * uniform(a, b, c, 2 * r) - 1.0;
      const double v = 2.0 * uniform(a, b, c, 2 * r + 1) - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
    throw numerical_error("polar method failed to accept within 256 attempts");
  }

 private:
  std::uint64_t key_;
};

// Deterministic Fisher-Yates permutation of 0..n-1.
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  const CounterRng rng(seed, stream);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform(i) * static_cast<double>(i));
    std::swap(p[i - 1], p[j < i ? j : i - 1]);
  }
  return p;
}

}  // namespace sigpath

#endif
