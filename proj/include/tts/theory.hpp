#pragma once

#include <cstdint>
#include <optional>

#include "tts/problem.hpp"
#include "tts/schedule.hpp"
#include "tts/types.hpp"

namespace tts {

/// Long-run covariances of the centered noise, combining the instantaneous
/// covariance with all cross-time correlations:
///   gamma_x  = E[bh2 bt2' + bt2 bh2' - bt2 bt2']      (dx x dx, symmetric)
///   gamma_xy = E[bh2 bt1' + bt2 bh1' - bt2 bt1']      (dx x dy)
///   gamma_y  = E[bh1 bt1' + bt1 bh1' - bt1 bt1']      (dy x dy, symmetric)
/// where bt_i is the centered noise and bh_i its Poisson-equation solution.
struct NoiseCovariances {
  Matrix gamma_x;
  Matrix gamma_xy;
  Matrix gamma_y;
};

/// Leading-term covariances of the rescaled errors, solved at a fixed beta:
/// E[yhat yhat'] ~ beta_k sigma_y, E[xhat yhat'] ~ beta_k sigma_xy,
/// E[xhat xhat'] ~ alpha_k sigma_x.
struct AsymptoticCovariances {
  Matrix sigma_x;   // dx x dx, symmetric PSD
  Matrix sigma_xy;  // dx x dy
  Matrix sigma_y;   // dy x dy, symmetric PSD
  double beta = 1.0;
};

/// Rate exponents of the higher-order terms, together with the Lyapunov
/// certificate Q of the shifted slow drift and the derived constant
/// q = beta ||Q||^{-1} / (4 + beta ||Q||^{-1}). The canonical choice of the
/// free parameter is varrho = 1 - q.
struct RateExponents {
  double varrho = 0.0;
  double q_delta_beta = 0.0;
  Matrix q_matrix;  // (Delta - I/(2 beta))' Q + Q (Delta - I/(2 beta)) = I
  double exp_y = 0.0;   // 1 + (1 - varrho) min(xi - 0.5, 1 - xi)
  double exp_xy = 0.0;  // min(xi + 0.5, 2 - xi)
  double exp_x = 0.0;   // min(1.5 xi, 1)
};

/// Noise covariances via the Poisson-equation route: exact finite sums over
/// states using the chain's Poisson solutions of the centered noise.
NoiseCovariances gamma_via_poisson(const TwoTimeScaleProblem& problem);

/// The same covariances via the stationary autocovariance series
///   gamma = E[bt(O_0) bt(O_0)'] + sum_{j>=1} E[bt(O_j) bt(O_0)' + bt(O_0) bt(O_j)'],
/// evaluated exactly with matrix powers and truncated once the geometric
/// tail bound (max-norm of bt)^2 rho^J / (1 - rho) drops below tail_tol.
NoiseCovariances gamma_via_autocovariance(const TwoTimeScaleProblem& problem,
                                          double tail_tol = 1e-10);

/// Solves the covariance system in its natural order,
///   A22 sigma_x + sigma_x A22'      = gamma_x
///   A12 sigma_x + sigma_yx A22'     = gamma_yx          (solved for sigma_yx)
///   (Delta - I/(2b)) sigma_y + sigma_y (Delta - I/(2b))'
///       = gamma_y - A12 sigma_xy - sigma_yx A12',
/// where sigma_yx = sigma_xy'. Requires -A22 and -(Delta - I/(2 beta))
/// Hurwitz; precondition failures are reported naming the equation.
AsymptoticCovariances sigma_triple(const TwoTimeScaleProblem& problem,
                                   const NoiseCovariances& gammas, double beta);

/// Right-hand side of the slow-scale Lyapunov equation,
/// gamma_y - A12 sigma_xy - sigma_yx A12', symmetrized. Also evaluates the
/// sigma-free algebraic form
///   gamma_y + A12 A22^{-1} gamma_x A22^{-T} A12' - A12 A22^{-1} gamma_xy
///           - gamma_yx A22^{-T} A12'
/// and throws NumericalError if the two disagree, which would signal an
/// internal inconsistency between the gamma and sigma inputs.
Matrix drive_matrix(const TwoTimeScaleProblem& problem,
                    const NoiseCovariances& gammas,
                    const AsymptoticCovariances& sigmas);

/// Monte-Carlo estimate of the drive matrix: with stationary starts,
///   h_N = (1/N) sum_{j<N} bt1(O_j) - A12 A22^{-1} bt2(O_j),
/// and N E[h_N h_N'] converges to the drive matrix. Returns N times the
/// empirical second moment over the replications. Deterministic in seed and
/// independent of the worker count (fixed-order reduction).
Matrix monte_carlo_hN(const TwoTimeScaleProblem& problem, long n,
                      int replications, std::uint64_t seed, int workers = 1);

/// Closed-form averaged-iterate covariance A^{-1} gamma_x A^{-T} of linear
/// SA with running-average output (the beta = 1 specialization).
Matrix polyak_sigma(const Matrix& a_mean, const Matrix& gamma_x);

/// Exponents of the higher-order terms for the given schedule and slow drift.
/// When varrho is not supplied, the canonical value 1 - q_delta_beta is used;
/// any value in (0, 1) is accepted.
RateExponents rate_exponents(const StepSchedule& schedule, const Matrix& delta,
                             std::optional<double> varrho = std::nullopt);

/// Scalar step-size figure of merit h(beta) = beta^2 / (2 beta - 1) governing
/// the asymptotic slow-scale covariance; defined for beta > 0.5.
double h_beta(double beta);

/// argmin of h over (0.5, 10], located by golden-section search (it is 1).
double optimal_beta_scalar();

}  // namespace tts
