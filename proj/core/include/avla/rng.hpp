#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace avla {

// Seeded random stream. Distributions are computed here from raw 64-bit
// draws so results do not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : root_(seed), engine_(mix(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second variate is cached.
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  // Index drawn from a probability vector (need not be exactly normalized).
  std::size_t categorical(std::span<const double> probs);

  // Independent stream derived from the construction seed and a stream
  // index. Does not advance this generator.
  [[nodiscard]] Rng split(std::uint64_t stream) const;

  // splitmix64 finalizer.
  static std::uint64_t mix(std::uint64_t x);

 private:
  std::uint64_t root_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace avla
