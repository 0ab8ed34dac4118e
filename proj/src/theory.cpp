#include "tts/theory.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "tts/linalg.hpp"

namespace tts {

namespace {

constexpr long kMaxSeriesTerms = 100000;

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// E_mu[f(o) g(o)'] for per-state rows F (n x p) and G (n x q).
Matrix weighted_cross(const Vector& mu, const Matrix& f, const Matrix& g) {
  return f.transpose() * mu.asDiagonal() * g;
}

}  // namespace

NoiseCovariances gamma_via_poisson(const TwoTimeScaleProblem& problem) {
  const StationarySummary summary = summarize(problem);
  const CenteredNoise noise = centered_noise(problem, summary);
  const Vector& mu = problem.chain().stationary();

  const Matrix bh1 = solve_poisson(problem.chain(), noise.b1);
  const Matrix bh2 = solve_poisson(problem.chain(), noise.b2);

  NoiseCovariances out;
  out.gamma_x = symmetrized(weighted_cross(mu, bh2, noise.b2) +
                            weighted_cross(mu, noise.b2, bh2) -
                            weighted_cross(mu, noise.b2, noise.b2));
  out.gamma_xy = weighted_cross(mu, bh2, noise.b1) +
                 weighted_cross(mu, noise.b2, bh1) -
                 weighted_cross(mu, noise.b2, noise.b1);
  out.gamma_y = symmetrized(weighted_cross(mu, bh1, noise.b1) +
                            weighted_cross(mu, noise.b1, bh1) -
                            weighted_cross(mu, noise.b1, noise.b1));
  return out;
}

NoiseCovariances gamma_via_autocovariance(const TwoTimeScaleProblem& problem,
                                          double tail_tol) {
  if (!(tail_tol > 0.0)) {
    throw std::invalid_argument("gamma_via_autocovariance: tail_tol must be positive");
  }
  const StationarySummary summary = summarize(problem);
  const CenteredNoise noise = centered_noise(problem, summary);
  const Vector& mu = problem.chain().stationary();
  const Matrix& p = problem.chain().transition();

  MixingProfile mixing;
  try {
    mixing = mixing_profile(problem.chain(), 512);
  } catch (const NumericalError&) {
    throw NumericalError(
        "gamma_via_autocovariance: cannot certify a geometric mixing rate < 1");
  }
  const double rho = mixing.rho_hat;

  const double max_norm =
      std::max({noise.b1.rowwise().norm().maxCoeff(),
                noise.b2.rowwise().norm().maxCoeff(), 1e-300});
  // Truncation index from the geometric tail bound
  // max_norm^2 rho^J / (1 - rho) < tail_tol.
  long terms = 0;
  double tail = max_norm * max_norm / (1.0 - rho);
  while (tail >= tail_tol && terms < kMaxSeriesTerms) {
    tail *= rho;
    ++terms;
  }

  // Lag-0 terms.
  NoiseCovariances out;
  out.gamma_x = weighted_cross(mu, noise.b2, noise.b2);
  out.gamma_xy = weighted_cross(mu, noise.b2, noise.b1);
  out.gamma_y = weighted_cross(mu, noise.b1, noise.b1);

  // E[f(O_j) g(O_0)'] = sum_o mu(o) (P^j f)(o) g(o)'; P^j f is accumulated by
  // one multiplication per lag, so the whole series costs O(J n^2 d).
  Matrix pj_b1 = noise.b1;
  Matrix pj_b2 = noise.b2;
  for (long j = 1; j <= terms; ++j) {
    pj_b1 = (p * pj_b1).eval();
    pj_b2 = (p * pj_b2).eval();
    out.gamma_x += weighted_cross(mu, pj_b2, noise.b2) +
                   weighted_cross(mu, noise.b2, pj_b2);
    out.gamma_xy += weighted_cross(mu, pj_b2, noise.b1) +
                    weighted_cross(mu, noise.b2, pj_b1);
    out.gamma_y += weighted_cross(mu, pj_b1, noise.b1) +
                   weighted_cross(mu, noise.b1, pj_b1);
  }
  out.gamma_x = symmetrized(out.gamma_x);
  out.gamma_y = symmetrized(out.gamma_y);
  return out;
}

AsymptoticCovariances sigma_triple(const TwoTimeScaleProblem& problem,
                                   const NoiseCovariances& gammas, double beta) {
  const StationarySummary s = summarize(problem);
  const int dy = problem.dim_y();

  if (!is_hurwitz(Matrix(-s.a22))) {
    throw NumericalError("sigma_triple: -A22 is not Hurwitz (fast-scale Lyapunov equation)");
  }
  const Matrix shifted = s.delta - Matrix::Identity(dy, dy) / (2.0 * beta);
  if (!is_hurwitz(Matrix(-shifted))) {
    throw NumericalError(
        "sigma_triple: -(Delta - I/(2 beta)) is not Hurwitz (slow-scale Lyapunov equation)");
  }

  AsymptoticCovariances out;
  out.beta = beta;
  out.sigma_x = solve_lyapunov(s.a22, gammas.gamma_x);

  // Cross equation solved for sigma_yx = sigma_xy' in the form
  // X A22' = gamma_yx - A12 sigma_x, a Sylvester equation with zero left
  // operand (solvable because A22 is nonsingular).
  const Matrix gamma_yx = gammas.gamma_xy.transpose();
  const Matrix sigma_yx = solve_sylvester(
      Matrix::Zero(dy, dy), s.a22.transpose(), Matrix(gamma_yx - s.a12 * out.sigma_x));
  out.sigma_xy = sigma_yx.transpose();

  const Matrix drive =
      symmetrized(gammas.gamma_y - s.a12 * out.sigma_xy - sigma_yx * s.a12.transpose());
  out.sigma_y = solve_lyapunov(shifted, drive);
  return out;
}

Matrix drive_matrix(const TwoTimeScaleProblem& problem, const NoiseCovariances& gammas,
                    const AsymptoticCovariances& sigmas) {
  const StationarySummary s = summarize(problem);

  const Matrix direct = symmetrized(gammas.gamma_y - s.a12 * sigmas.sigma_xy -
                                    sigmas.sigma_xy.transpose() * s.a12.transpose());

  // Sigma-free form obtained by eliminating sigma_x and sigma_xy with the
  // first two covariance equations.
  const Matrix a22_inv_gx = solve_linear(s.a22, gammas.gamma_x);
  const Matrix a22_inv_gxy = solve_linear(s.a22, gammas.gamma_xy);
  const Matrix cross = s.a12 * a22_inv_gxy;
  const Matrix eliminated =
      symmetrized(gammas.gamma_y +
                  s.a12 * solve_linear(s.a22, Matrix(a22_inv_gx.transpose())).transpose() *
                      s.a12.transpose() -
                  cross - cross.transpose());

  const double mismatch = (direct - eliminated).norm();
  if (mismatch > 1e-10 * (1.0 + gammas.gamma_y.norm() + gammas.gamma_x.norm())) {
    throw NumericalError(
        "drive_matrix: algebraic identity violated; gamma and sigma inputs are inconsistent");
  }
  return direct;
}

Matrix monte_carlo_hN(const TwoTimeScaleProblem& problem, long n, int replications,
                      std::uint64_t seed, int workers) {
  if (n < 1 || replications < 1) {
    throw std::invalid_argument("monte_carlo_hN: n and replications must be >= 1");
  }
  const StationarySummary summary = summarize(problem);
  const CenteredNoise noise = centered_noise(problem, summary);
  const int dy = problem.dim_y();

  // Per-state averaged-noise increments g(o) = bt1(o) - A12 A22^{-1} bt2(o).
  const Matrix a22_inv_bt2 = solve_linear(summary.a22, Matrix(noise.b2.transpose()));
  const Matrix increments = noise.b1 - (summary.a12 * a22_inv_bt2).transpose();

  std::vector<Vector> h(static_cast<std::size_t>(replications));
  auto run_range = [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      SplitMix64 rng = SplitMix64::stream(seed, static_cast<std::uint64_t>(r));
      int state = rng.categorical(problem.chain().stationary());
      Vector sum = Vector::Zero(dy);
      for (long j = 0; j < n; ++j) {
        sum += increments.row(state).transpose();
        state = rng.categorical(problem.chain().transition().row(state));
      }
      h[static_cast<std::size_t>(r)] = sum / static_cast<double>(n);
    }
  };

  const int pool = std::max(1, std::min<int>(workers, replications));
  if (pool == 1) {
    run_range(0, replications);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(pool));
    const int chunk = (replications + pool - 1) / pool;
    for (int t = 0; t < pool; ++t) {
      const int begin = t * chunk;
      const int end = std::min(replications, begin + chunk);
      if (begin >= end) break;
      threads.emplace_back(run_range, begin, end);
    }
    for (auto& th : threads) th.join();
  }

  // Reduction in replication order, independent of the pool size.
  Matrix second_moment = Matrix::Zero(dy, dy);
  for (const Vector& hr : h) {
    second_moment += hr * hr.transpose();
  }
  second_moment /= static_cast<double>(replications);
  return static_cast<double>(n) * second_moment;
}

Matrix polyak_sigma(const Matrix& a_mean, const Matrix& gamma_x) {
  // A^{-1} gamma_x A^{-T}: two triangular solves against the same LU.
  const Matrix left = solve_linear(a_mean, gamma_x);
  const Matrix full = solve_linear(a_mean, Matrix(left.transpose()));
  return symmetrized(full.transpose());
}

RateExponents rate_exponents(const StepSchedule& schedule, const Matrix& delta,
                             std::optional<double> varrho) {
  const Eigen::Index dy = delta.rows();
  const Matrix shifted = delta - Matrix::Identity(dy, dy) / (2.0 * schedule.beta);
  if (!is_hurwitz(Matrix(-shifted))) {
    throw NumericalError("rate_exponents: -(Delta - I/(2 beta)) is not Hurwitz");
  }

  RateExponents out;
  // (Delta - I/(2b))' Q + Q (Delta - I/(2b)) = I, i.e. a Lyapunov equation in
  // the transposed drift.
  out.q_matrix = solve_lyapunov(shifted.transpose(), Matrix::Identity(dy, dy));
  const double q_norm_inv = schedule.beta / spectral_norm(out.q_matrix);
  out.q_delta_beta = q_norm_inv / (4.0 + q_norm_inv);

  out.varrho = varrho.value_or(1.0 - out.q_delta_beta);
  if (!(out.varrho > 0.0) || !(out.varrho < 1.0)) {
    throw std::invalid_argument("rate_exponents: varrho must lie in (0, 1)");
  }

  const double xi = schedule.xi;
  out.exp_y = 1.0 + (1.0 - out.varrho) * std::min(xi - 0.5, 1.0 - xi);
  out.exp_xy = std::min(xi + 0.5, 2.0 - xi);
  out.exp_x = std::min(1.5 * xi, 1.0);
  return out;
}

double h_beta(double beta) {
  if (!(beta > 0.5)) {
    throw std::domain_error("h_beta: defined for beta > 0.5");
  }
  return beta * beta / (2.0 * beta - 1.0);
}

double optimal_beta_scalar() {
  // Golden-section search on (0.5, 10]; h is strictly unimodal there.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.5 + 1e-12;
  double hi = 10.0;
  double c = hi - phi * (hi - lo);
  double d = lo + phi * (hi - lo);
  double fc = h_beta(c);
  double fd = h_beta(d);
  while (hi - lo > 1e-10) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - phi * (hi - lo);
      fc = h_beta(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + phi * (hi - lo);
      fd = h_beta(d);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace tts
