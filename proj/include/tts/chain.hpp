#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tts/rng.hpp"
#include "tts/types.hpp"

namespace tts {

/// A finite, irreducible, aperiodic Markov chain. Both structural properties
/// are verified at construction (they are hard preconditions for everything
/// downstream), along with row-stochasticity of the transition matrix.
/// Immutable afterwards and safe to share across threads.
class ChainSpec {
 public:
  explicit ChainSpec(Matrix transition, std::vector<std::string> labels = {});

  int size() const { return static_cast<int>(transition_.rows()); }
  const Matrix& transition() const { return transition_; }
  const Vector& stationary() const { return stationary_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  Matrix transition_;
  Vector stationary_;
  std::vector<std::string> labels_;
};

/// Unique stationary distribution mu with mu' P = mu', entries nonnegative
/// and summing to one. Recomputed from the transition matrix.
Vector stationary_distribution(const ChainSpec& chain);

/// Solves the Poisson equation  hhat(o) = h(o) + sum_o' P(o'|o) hhat(o')
/// with the normalization sum_o mu(o) hhat(o) = 0, one column per component.
/// Rows of `h_centered` are the per-state values; their mu-weighted mean must
/// be zero (componentwise, within 1e-10) or the call is rejected.
Matrix solve_poisson(const ChainSpec& chain, const Matrix& h_centered);

/// Worst-case total-variation distance to stationarity, computed exactly from
/// matrix powers, together with the mixing time (first k with d_TV <= 1/4)
/// and a least-squares geometric fit of the decay rate.
struct MixingProfile {
  int tau_mix = 0;
  double rho_hat = 0.0;  // fitted geometric rate, clamped to (0,1)
  double second_eigenvalue_modulus = 0.0;
  std::vector<std::pair<int, double>> dtv_curve;
};

/// Throws NumericalError if d_TV has not dropped to 1/4 by k_max.
MixingProfile mixing_profile(const ChainSpec& chain, int k_max);

/// Start of a sampled path: either a fixed state or a draw from mu.
struct ChainStart {
  static ChainStart stationary() { return ChainStart{std::nullopt}; }
  static ChainStart fixed(int state) { return ChainStart{state}; }
  std::optional<int> state;
};

/// Sampled state sequence of length horizon + 1. A deterministic function of
/// (chain, start, horizon, rng state); the caller-supplied generator makes
/// the consumption order explicit: one draw for a stationary start, then one
/// draw per transition.
std::vector<int> sample_path(const ChainSpec& chain, const ChainStart& start,
                             long horizon, SplitMix64& rng);

/// Convenience overload owning its generator stream (seed, path_index).
std::vector<int> sample_path(const ChainSpec& chain, const ChainStart& start,
                             long horizon, std::uint64_t seed,
                             std::uint64_t path_index = 0);

}  // namespace tts
