#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "cclab/gaussian.hpp"

namespace cclab {

// Deterministic randomness source. Every stochastic routine in the library
// takes one of these (or a seed it derives streams from), so a fixed seed
// pins every draw. mt19937_64 output is specified exactly by the standard
// and uniforms/Gaussians are produced by explicit bit manipulation and
// inverse-CDF, so results are reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  // Independent stream for (seed, index); used to shard Monte Carlo work
  // into fixed blocks whose pooled result does not depend on thread count.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(seed + 0x9E3779B97F4A7C15ull * (index + 1));
  }

  std::uint64_t bits() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r = engine_();
    while (r >= limit) r = engine_();
    return static_cast<std::size_t>(r % n);
  }

  // Standard Gaussian via inverse CDF, so marginals match gaussian_cdf exactly.
  double gaussian() { return gaussian_quantile(uniform()); }

  // Gaussian conditioned on Z >= q: inverse CDF on the tail interval, no
  // rejection loop even for deep tails.
  double gaussian_above(double q) {
    return -gaussian_quantile(gaussian_tail(q) * uniform());
  }

  // Gaussian conditioned on Z < q.
  double gaussian_below(double q) {
    return gaussian_quantile(gaussian_cdf(q) * uniform());
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace cclab
