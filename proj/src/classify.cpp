#include "tts/classify.hpp"

#include <cmath>

namespace tts {

std::vector<double> default_kappa_grid() {
  std::vector<double> grid;
  grid.reserve(61);
  for (int i = 0; i <= 60; ++i) {
    grid.push_back(std::pow(10.0, -3.0 + static_cast<double>(i) / 10.0));
  }
  return grid;
}

Matrix stacked(const BlockSystem& system) { return scaled_stack(system, 1.0); }

Matrix scaled_stack(const BlockSystem& system, double kappa) {
  const Eigen::Index dy = system.a11.rows();
  const Eigen::Index dx = system.a22.rows();
  Matrix a(dy + dx, dy + dx);
  a.topLeftCorner(dy, dy) = system.a11;
  a.topRightCorner(dy, dx) = system.a12;
  a.bottomLeftCorner(dx, dy) = kappa * system.a21;
  a.bottomRightCorner(dx, dx) = kappa * system.a22;
  return a;
}

bool certifies_b(const BlockSystem& system, double kappa, double tol) {
  return is_hurwitz(Matrix(-scaled_stack(system, kappa)), tol);
}

Classification classify(const BlockSystem& system, const std::vector<double>& kappa_grid,
                        double tol) {
  if (kappa_grid.empty()) {
    throw std::invalid_argument("classify: kappa grid must be nonempty");
  }
  if (system.a11.rows() != system.a11.cols() || system.a22.rows() != system.a22.cols() ||
      system.a12.rows() != system.a11.rows() || system.a12.cols() != system.a22.rows() ||
      system.a21.rows() != system.a22.rows() || system.a21.cols() != system.a11.rows()) {
    throw std::invalid_argument("classify: inconsistent block dimensions");
  }

  Classification result;
  result.in_c = is_hurwitz(Matrix(-stacked(system)), tol);

  // D needs A22 invertible for the Schur complement; failure means not-in-D,
  // not an error.
  if (is_hurwitz(Matrix(-system.a22), tol)) {
    try {
      const Matrix delta = system.a11 - system.a12 * solve_linear(system.a22, system.a21);
      result.in_d = is_hurwitz(Matrix(-delta), tol);
    } catch (const SingularMatrixError&) {
      result.notes = "A22 singular: Delta undefined, D membership negative; ";
    }
  }

  const double tr11 = system.a11.trace();
  const double tr22 = system.a22.trace();
  if (tr11 <= 0.0 && tr22 <= 0.0) {
    // tr(A11) + kappa tr(A22) <= 0 for every kappa > 0: -A_kappa can never be
    // Hurwitz, so B is decided without scanning.
    result.in_b = false;
    result.kappa_grid_exhausted = false;
    result.notes += "trace condition excludes every kappa > 0";
    return result;
  }

  for (double kappa : kappa_grid) {
    if (tr11 + kappa * tr22 <= 0.0) continue;
    if (certifies_b(system, kappa, tol)) {
      result.in_b = true;
      result.witness_kappa = kappa;
      break;
    }
  }

  if (!result.witness_kappa.has_value()) {
    if (result.in_c || result.in_d) {
      // Membership follows from the implications C ⊆ B and D ⊆ B even though
      // the grid produced no witness.
      result.in_b = true;
      result.kappa_grid_exhausted = true;
      result.notes += result.in_c ? "B via C implication (grid exhausted)"
                                  : "B via D implication (grid exhausted)";
    } else {
      result.kappa_grid_exhausted = true;
      result.notes += "no grid witness; B membership undecided";
    }
  }
  return result;
}

}  // namespace tts
