#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tts/linalg.hpp"
#include "tts/types.hpp"

namespace tts {

/// Stationary mean blocks of a coupled linear system; classification only
/// depends on these, never on the noise.
struct BlockSystem {
  Matrix a11, a12, a21, a22;
};

/// Membership in the solvable-problem families:
///   B: some kappa > 0 makes the kappa-scaled stack -A_kappa Hurwitz
///      (single time-scale with a tuned step ratio),
///   C: -A itself is Hurwitz (single time-scale, no tuning),
///   D: -A22 and -Delta are Hurwitz (two time-scale).
/// C and D each imply B; membership in B alone is existential, so the grid
/// search is a sound partial decision with an explicit exhaustion flag.
struct Classification {
  bool in_b = false;
  std::optional<double> witness_kappa;  // smallest certifying grid point
  bool in_c = false;
  bool in_d = false;
  bool kappa_grid_exhausted = false;  // B unresolved by grid and implications
  std::string notes;
};

/// 61 log-spaced points covering [1e-3, 1e3].
std::vector<double> default_kappa_grid();

/// The stacked mean matrix [[A11, A12], [A21, A22]].
Matrix stacked(const BlockSystem& system);

/// The stack with its lower block row scaled by kappa.
Matrix scaled_stack(const BlockSystem& system, double kappa);

/// True iff -A_kappa is Hurwitz at this kappa, i.e. kappa certifies B.
bool certifies_b(const BlockSystem& system, double kappa, double tol = kHurwitzTol);

/// Grid scan ascending in kappa, with the trace shortcut: a kappa with
/// tr(A11) + kappa tr(A22) <= 0 cannot certify (the eigenvalue sum of
/// -A_kappa would be nonnegative) and is skipped. When both block traces are
/// nonpositive that argument excludes every kappa > 0 and B is decided
/// negatively. Degenerate inputs yield negative memberships with notes,
/// never errors.
Classification classify(const BlockSystem& system, const std::vector<double>& kappa_grid,
                        double tol = kHurwitzTol);

inline Classification classify(const BlockSystem& system, double tol = kHurwitzTol) {
  return classify(system, default_kappa_grid(), tol);
}

}  // namespace tts
