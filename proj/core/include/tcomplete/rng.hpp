#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace tcomplete {

/// Deterministic random stream used by every sampling routine in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Bounded integers, uniforms and normals are derived from the raw
/// 64-bit words here rather than through <random> distributions, whose
/// algorithms are implementation-defined, so a seed reproduces the same draws
/// on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, range) by Lemire's multiply-high mapping
  /// (no rejection step; bias is below 2^-64 * range).
  std::uint64_t bounded(std::uint64_t range);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via the Box-Muller transform. Draws come in pairs; the
  /// second value of each pair is cached.
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Folds a list of integers into one seed: h = mix64(h ^ v + golden) per value,
/// starting from h = 0. Used to derive independent per-trial streams.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

}  // namespace tcomplete
