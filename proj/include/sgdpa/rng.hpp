#pragma once

#include <cstddef>
#include <cstdint>

namespace sgdpa {

/// Counter-based 64-bit generator (SplitMix64 output function applied to
/// key + counter·γ). The n-th draw depends only on (key, n), so streams are
/// reproducible across platforms and trivially splittable: `substream(id)`
/// derives an independent key.
///
/// All derived draws (indices, uniforms, normals) are computed here rather
/// than through <random> distributions, whose algorithms are implementation
/// defined.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1).
  double uniform01();
  double uniform(double lo, double hi);

  /// Unbiased uniform integer in [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal via Box-Muller (consumes two draws).
  double normal();

  CounterRng substream(std::uint64_t id) const;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  friend bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sgdpa
