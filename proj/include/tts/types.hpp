#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace tts {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Numerical failure (non-convergence, loss of precision). Distinct from
/// std::invalid_argument, which is reserved for malformed inputs.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pivot or an induced linear system fell below the singularity threshold.
class SingularMatrixError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Spectra of the Sylvester operands overlap; the equation has no unique
/// solution.
class ResonanceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Throws std::invalid_argument if the matrix carries NaN or Inf entries.
inline void require_finite(const Matrix& m, const std::string& name) {
  if (!m.allFinite()) {
    throw std::invalid_argument(name + ": entries must be finite");
  }
}

inline void require_finite(const Vector& v, const std::string& name) {
  if (!v.allFinite()) {
    throw std::invalid_argument(name + ": entries must be finite");
  }
}

}  // namespace tts
