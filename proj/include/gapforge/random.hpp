#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace gapforge {

/// Deterministic 64-bit mixing of two seeds (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

/// Seeded generator with platform-independent derived distributions.
///
/// The standard library's distribution objects are implementation-defined, so
/// uniform and normal draws are derived directly from the engine's output bits.
/// Identical seeds give identical streams on every toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal (Box-Muller, one draw per pair).
  double normal();
  /// Uniform integer on [0, n). n must be positive.
  std::size_t below(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }

  /// A uniformly random permutation of 0..n-1 (Fisher-Yates).
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace gapforge
