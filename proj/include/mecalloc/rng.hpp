#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mecalloc {

// Seeded random source with platform-independent derived distributions.
// std::uniform_real_distribution and friends are implementation-defined, so
// everything that feeds an output file goes through these helpers instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t n);

  // Index drawn with probability proportional to weights[i] (non-negative,
  // positive sum). Inversion over the running sum.
  std::size_t weighted(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; derives independent sub-seeds from (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mecalloc
