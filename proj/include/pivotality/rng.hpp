#pragma once

#include <array>
#include <cstdint>

namespace pivotality {

/// Counter-based seed derivation. This function is part of the external
/// contract (see docs/seed_derivation.md) and must stay bit-exact:
///
///   mix(z):  z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
///            z ^= z >> 27; z *= 0x94d049bb133111eb; z ^= z >> 31
///   derive(master, i) = mix(mix(master) + (i + 1) * 0x9e3779b97f4a7c15)
///
/// `mix` is a bijection on 64-bit words and the inner sum is injective in
/// `i` (odd multiplier), so derive(master, ·) is injective.
std::uint64_t mix64(std::uint64_t z) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Reproducible random stream identified by (master_seed, stream_index).
///
/// The generator is xoshiro256** whose state is filled by a splitmix64
/// sequence started at derive_seed(master, index). Variates are produced by
/// hand-written transforms (no <random> distributions) so that a stream
/// yields the same numbers on every platform with an IEEE libm.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const noexcept { return master_; }
  std::uint64_t stream_index() const noexcept { return index_; }

  /// Independent child stream. Replicate r of an estimator uses
  /// `rng.substream(r)`; composite operations split first, e.g.
  /// `rng.substream(0).substream(r)` for one part and `substream(1)...`.
  RngStream substream(std::uint64_t i) const {
    return RngStream(derive_seed(master_, index_), i);
  }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0,1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0,1].
  double uniform_pos() noexcept { return 1.0 - uniform(); }
  /// Uniform on [a,b).
  double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }
  /// Uniform index in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Unit-rate exponential.
  double exponential() noexcept;
  /// Standard normal (Marsaglia polar method).
  double normal() noexcept;
  /// Poisson variate with the given mean (mean >= 0, finite).
  std::uint64_t poisson(double mean);

 private:
  std::uint64_t master_;
  std::uint64_t index_;
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace pivotality
