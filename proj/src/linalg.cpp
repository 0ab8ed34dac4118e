#include "tts/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace tts {

namespace {

constexpr int kMaxEigenDim = 64;

void require_square(const Matrix& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(name) + ": matrix must be square");
  }
}

// Eigenvalues of the 1x1 and 2x2 diagonal blocks of a real quasi-triangular
// Schur factor.
void append_block_eigenvalues(const Matrix& t, int i, int block,
                              std::vector<Complex>& out) {
  if (block == 1) {
    out.emplace_back(t(i, i), 0.0);
    return;
  }
  const double a = t(i, i);
  const double b = t(i, i + 1);
  const double c = t(i + 1, i);
  const double d = t(i + 1, i + 1);
  const double mean = 0.5 * (a + d);
  const double disc = 0.25 * (a - d) * (a - d) + b * c;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    out.emplace_back(mean + root, 0.0);
    out.emplace_back(mean - root, 0.0);
  } else {
    const double imag = std::sqrt(-disc);
    out.emplace_back(mean, imag);
    out.emplace_back(mean, -imag);
  }
}

}  // namespace

std::vector<Complex> eigenvalues(const Matrix& m) {
  require_square(m, "eigenvalues");
  require_finite(m, "eigenvalues");
  const int n = static_cast<int>(m.rows());
  if (n == 0 || n > kMaxEigenDim) {
    throw std::invalid_argument("eigenvalues: dimension must be in [1, 64]");
  }

  Eigen::RealSchur<Matrix> schur;
  schur.setMaxIterations(100 * n);
  schur.compute(m, /*computeU=*/false);
  if (schur.info() != Eigen::Success) {
    throw NumericalError("eigenvalues: QR iteration did not converge within 100*d sweeps");
  }

  const Matrix& t = schur.matrixT();
  std::vector<Complex> values;
  values.reserve(n);
  int i = 0;
  while (i < n) {
    const bool pair = (i + 1 < n) && (std::abs(t(i + 1, i)) > 0.0);
    append_block_eigenvalues(t, i, pair ? 2 : 1, values);
    i += pair ? 2 : 1;
  }
  return values;
}

bool is_hurwitz(const Matrix& m, double tol) {
  double max_real = -std::numeric_limits<double>::infinity();
  for (const Complex& lambda : eigenvalues(m)) {
    max_real = std::max(max_real, lambda.real());
  }
  return max_real < -tol;
}

Matrix solve_linear(const Matrix& m, const Matrix& rhs) {
  require_square(m, "solve_linear");
  require_finite(m, "solve_linear");
  require_finite(rhs, "solve_linear rhs");
  if (rhs.rows() != m.rows()) {
    throw std::invalid_argument("solve_linear: rhs row count mismatch");
  }

  Eigen::PartialPivLU<Matrix> lu(m);
  const double scale = m.cwiseAbs().maxCoeff();
  const double pivot_floor = kPivotRelTol * std::max(scale, 1e-300);
  if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= pivot_floor) {
    throw SingularMatrixError("solve_linear: pivot below relative threshold 1e-12");
  }

  Matrix x = lu.solve(rhs);
  const double residual = (m * x - rhs).norm();
  if (!(residual <= kResidualTol * (1.0 + rhs.norm()))) {
    throw NumericalError("solve_linear: residual exceeds 1e-10*(1+||rhs||)");
  }
  return x;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& g) {
  require_square(a, "solve_lyapunov");
  if (g.rows() != a.rows() || g.cols() != a.cols()) {
    throw std::invalid_argument("solve_lyapunov: dimension mismatch between a and g");
  }
  require_finite(a, "solve_lyapunov");
  require_finite(g, "solve_lyapunov g");
  if ((g - g.transpose()).norm() > 1e-8 * (1.0 + g.norm())) {
    throw std::invalid_argument("solve_lyapunov: g must be symmetric");
  }

  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  // vec(a*s) = (I (x) a) vec(s), vec(s*a') = (a (x) I) vec(s).
  const Matrix system = kronecker(id, a) + kronecker(a, id);

  Eigen::PartialPivLU<Matrix> lu(system);
  const double scale = system.cwiseAbs().maxCoeff();
  if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <=
      kPivotRelTol * std::max(scale, 1e-300)) {
    throw SingularMatrixError(
        "solve_lyapunov: induced system is singular (eigenvalue sum condition violated)");
  }

  const Vector vec_g = Eigen::Map<const Vector>(g.data(), n * n);
  const Vector vec_s = lu.solve(vec_g);
  Matrix s = Eigen::Map<const Matrix>(vec_s.data(), n, n);
  s = 0.5 * (s + s.transpose()).eval();

  const double residual = (a * s + s * a.transpose() - g).norm();
  if (!(residual <= kResidualTol * (1.0 + g.norm()))) {
    throw NumericalError("solve_lyapunov: residual exceeds 1e-10*(1+||g||)");
  }
  return s;
}

Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
  require_square(a, "solve_sylvester a");
  require_square(b, "solve_sylvester b");
  if (c.rows() != a.rows() || c.cols() != b.rows()) {
    throw std::invalid_argument("solve_sylvester: c must be rows(a) x rows(b)");
  }
  require_finite(a, "solve_sylvester a");
  require_finite(b, "solve_sylvester b");
  require_finite(c, "solve_sylvester c");

  const Eigen::Index m = a.rows();
  const Eigen::Index n = b.rows();
  // vec(a*x) = (I_n (x) a) vec(x), vec(x*b) = (b' (x) I_m) vec(x).
  const Matrix system = kronecker(Matrix::Identity(n, n), a) +
                        kronecker(b.transpose(), Matrix::Identity(m, m));

  Eigen::PartialPivLU<Matrix> lu(system);
  const double scale = std::max(system.cwiseAbs().maxCoeff(), 1e-300);
  if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= kPivotRelTol * scale) {
    throw ResonanceError(
        "solve_sylvester: spectra of a and -b overlap (induced system singular)");
  }

  const Vector vec_c = Eigen::Map<const Vector>(c.data(), m * n);
  const Vector vec_x = lu.solve(vec_c);
  Matrix x = Eigen::Map<const Matrix>(vec_x.data(), m, n);

  const double residual = (a * x + x * b - c).norm();
  if (!(residual <= kResidualTol * (1.0 + c.norm()))) {
    throw NumericalError("solve_sylvester: residual exceeds 1e-10*(1+||c||)");
  }
  return x;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

}  // namespace tts
