#pragma once

#include <cstdint>

#include "tts/types.hpp"

namespace tts {

/// SplitMix64 (Steele, Lea & Flood 2014): a 64-bit counter-based generator.
/// The state is a Weyl sequence advanced by a fixed odd constant and each
/// output is a bijective avalanche mix of the counter, so jump-ahead is O(1)
/// and distinct counters give statistically independent words.
///
/// Streams are keyed by (seed, stream): every Monte-Carlo path owns the
/// stream equal to its path index, which makes ensembles reproducible
/// path-by-path and safe to evaluate concurrently without coordination.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  /// Generator for stream `stream` of the master `seed`. Different (seed,
  /// stream) pairs yield unrelated state trajectories.
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t stream);

  /// Finalizer of the generator: one avalanche mix of a 64-bit word.
  static std::uint64_t mix(std::uint64_t z);

  std::uint64_t next();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Index drawn from the categorical distribution given by `weights`
  /// (nonnegative, summing to ~1). Consumes exactly one uniform. Accepts any
  /// vector-shaped Eigen expression, e.g. a transition-matrix row.
  template <typename Derived>
  int categorical(const Eigen::MatrixBase<Derived>& weights) {
    const double u = uniform01();
    double cum = 0.0;
    const int n = static_cast<int>(weights.size());
    for (int i = 0; i < n; ++i) {
      cum += weights(i);
      if (u < cum) return i;
    }
    // Floating-point dust: the weights sum to slightly below one.
    for (int i = n - 1; i >= 0; --i) {
      if (weights(i) > 0.0) return i;
    }
    return n - 1;
  }

 private:
  std::uint64_t state_;
};

}  // namespace tts
