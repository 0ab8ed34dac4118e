#pragma once

#include <vector>

#include "tts/types.hpp"

namespace tts {

/// Default tolerance for Hurwitz tests: a matrix counts as Hurwitz when every
/// eigenvalue satisfies Re(lambda) < -kHurwitzTol. Exposed because set
/// classifications are tolerance-sensitive near stability boundaries.
inline constexpr double kHurwitzTol = 1e-9;

/// Pivot threshold of the LU solver, relative to the largest entry.
inline constexpr double kPivotRelTol = 1e-12;

/// Residual budget for the dense solvers, scaled by (1 + ||rhs||_F).
inline constexpr double kResidualTol = 1e-10;

/// All eigenvalues of a square matrix, with multiplicity, via real Schur
/// reduction (Hessenberg + shifted QR); trailing 2x2 blocks are solved in
/// closed form to extract complex pairs. Dimension is capped at 64.
///
/// Throws std::invalid_argument for non-square or oversized input and
/// NumericalError if the QR iteration does not converge.
std::vector<Complex> eigenvalues(const Matrix& m);

/// True iff max_i Re(lambda_i(m)) < -tol.
bool is_hurwitz(const Matrix& m, double tol = kHurwitzTol);

/// Solves m * x = rhs by partial-pivot LU. Throws SingularMatrixError when a
/// pivot falls below kPivotRelTol relative to the largest entry of m, and
/// NumericalError if the back-substituted residual exceeds its budget.
Matrix solve_linear(const Matrix& m, const Matrix& rhs);

/// Solves the Lyapunov equation a*s + s*a' = g for symmetric g, via Kronecker
/// vectorization and a dense solve. The result is explicitly symmetrized.
/// Unique solvability requires lambda_i(a) + lambda_j(a) != 0 for all i, j;
/// -a Hurwitz is the caller-checked sufficient condition.
Matrix solve_lyapunov(const Matrix& a, const Matrix& g);

/// Solves the Sylvester equation a*x + x*b = c. Requires the spectra of a and
/// -b to be disjoint; throws ResonanceError when they overlap.
Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);

/// Kronecker product, column-major vec convention: vec(a X b') = (b (x) a) vec(X).
Matrix kronecker(const Matrix& a, const Matrix& b);

/// Euclidean operator 2-norm (largest singular value).
double spectral_norm(const Matrix& m);

}  // namespace tts
