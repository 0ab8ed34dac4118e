#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tts/chain.hpp"
#include "tts/schedule.hpp"
#include "tts/types.hpp"

namespace tts {

/// Per-state update blocks of the coupled iteration: for the chain in state o
/// the slow variable moves by beta_k (b1 - A11 y - A12 x) and the fast one by
/// alpha_k (b2 - A21 y - A22 x).
struct StateData {
  Matrix a11, a12, a21, a22;
  Vector b1, b2;
};

/// Stationary means of the per-state blocks, the Schur-complement drift
/// Delta = A11 - A12 A22^{-1} A21, and the fixed point (y*, x*).
struct StationarySummary {
  Matrix a11, a12, a21, a22;
  Vector b1, b2;
  Matrix delta;
  Vector y_star, x_star;
};

/// A linear two-time-scale problem with tabular Markov-modulated noise: one
/// set of blocks per chain state, whose stationary means drive the limiting
/// dynamics. Immutable after construction; shared read-only by simulation
/// workers.
class TwoTimeScaleProblem {
 public:
  TwoTimeScaleProblem(ChainSpec chain, std::vector<StateData> per_state);

  const ChainSpec& chain() const { return chain_; }
  int states() const { return chain_.size(); }
  int dim_y() const { return dy_; }
  int dim_x() const { return dx_; }
  const StateData& state(int o) const { return per_state_[static_cast<std::size_t>(o)]; }

 private:
  ChainSpec chain_;
  int dy_ = 0;
  int dx_ = 0;
  std::vector<StateData> per_state_;
};

/// Stationary means, Delta, and the fixed point obtained by the two-step
/// elimination: x*(y) = A22^{-1}(b2 - A21 y) substituted into the slow
/// equation gives y* = Delta^{-1}(b1 - A12 A22^{-1} b2).
/// Throws SingularMatrixError naming the offending matrix (A22 or Delta).
StationarySummary summarize(const TwoTimeScaleProblem& problem);

/// Centered noise vectors, one row per state:
///   bt_i(o) = b_i(o) - b_i + (A_i1 - A_i1(o)) y* + (A_i2 - A_i2(o)) x*.
/// Their mu-weighted mean is zero by construction.
struct CenteredNoise {
  Matrix b1;  // states x dy
  Matrix b2;  // states x dx
};
CenteredNoise centered_noise(const TwoTimeScaleProblem& problem);
CenteredNoise centered_noise(const TwoTimeScaleProblem& problem,
                             const StationarySummary& summary);

/// Error coordinates of the coupled iteration: yhat = y - y* and
/// xhat = x - x* + A22^{-1} A21 (y - y*).
std::pair<Vector, Vector> hat_coordinates(const StationarySummary& summary,
                                          const Vector& y, const Vector& x);

struct ValidationCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }
};

/// Advisory check of the standing assumptions: -A22 and -Delta Hurwitz,
/// 0.5 < xi < 1, and -(Delta - I/(2 beta)) Hurwitz. Never throws on failure;
/// the instability experiments run failing configurations on purpose.
ValidationReport validate(const TwoTimeScaleProblem& problem,
                          const StepSchedule& schedule);

}  // namespace tts
