#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace crowdimpute {

/// Derive an independent 64-bit seed for `stream` from a master seed
/// (splitmix64 finalizer over the pair). Used everywhere a stage, question or
/// imputation copy needs its own reproducible stream.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seeded random source. Distributions come from Boost.Random, whose
/// algorithms are fixed across platforms, so results depend only on the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);
  double normal(double mean, double sd);
  double chi_squared(double dof);
  bool bernoulli(double p) { return uniform() < p; }

  /// A new generator seeded from this one's next output.
  Rng fork() { return Rng(split_seed(next_u64(), 0x9e3779b97f4a7c15ULL)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace crowdimpute
