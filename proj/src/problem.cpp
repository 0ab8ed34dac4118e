#include "tts/problem.hpp"

#include <cmath>

#include "tts/linalg.hpp"

namespace tts {

namespace {

void check_block(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                 const char* name, int state) {
  if (m.rows() != rows || m.cols() != cols) {
    throw std::invalid_argument(std::string(name) + " of state " +
                                std::to_string(state + 1) + " has inconsistent dimensions");
  }
  require_finite(m, name);
}

}  // namespace

TwoTimeScaleProblem::TwoTimeScaleProblem(ChainSpec chain, std::vector<StateData> per_state)
    : chain_(std::move(chain)), per_state_(std::move(per_state)) {
  if (static_cast<int>(per_state_.size()) != chain_.size()) {
    throw std::invalid_argument("TwoTimeScaleProblem: one StateData per chain state required");
  }
  const StateData& first = per_state_.front();
  dy_ = static_cast<int>(first.a11.rows());
  dx_ = static_cast<int>(first.a22.rows());
  if (dy_ == 0 || dx_ == 0) {
    throw std::invalid_argument("TwoTimeScaleProblem: dimensions must be positive");
  }
  for (int o = 0; o < chain_.size(); ++o) {
    const StateData& s = per_state_[static_cast<std::size_t>(o)];
    check_block(s.a11, dy_, dy_, "A11", o);
    check_block(s.a12, dy_, dx_, "A12", o);
    check_block(s.a21, dx_, dy_, "A21", o);
    check_block(s.a22, dx_, dx_, "A22", o);
    if (s.b1.size() != dy_ || s.b2.size() != dx_) {
      throw std::invalid_argument("b1/b2 of state " + std::to_string(o + 1) +
                                  " have inconsistent dimensions");
    }
    require_finite(s.b1, "b1");
    require_finite(s.b2, "b2");
  }
}

StationarySummary summarize(const TwoTimeScaleProblem& problem) {
  const Vector& mu = problem.chain().stationary();
  const int dy = problem.dim_y();
  const int dx = problem.dim_x();

  StationarySummary s;
  s.a11 = Matrix::Zero(dy, dy);
  s.a12 = Matrix::Zero(dy, dx);
  s.a21 = Matrix::Zero(dx, dy);
  s.a22 = Matrix::Zero(dx, dx);
  s.b1 = Vector::Zero(dy);
  s.b2 = Vector::Zero(dx);
  for (int o = 0; o < problem.states(); ++o) {
    const StateData& d = problem.state(o);
    s.a11 += mu(o) * d.a11;
    s.a12 += mu(o) * d.a12;
    s.a21 += mu(o) * d.a21;
    s.a22 += mu(o) * d.a22;
    s.b1 += mu(o) * d.b1;
    s.b2 += mu(o) * d.b2;
  }

  Matrix a22_inv_a21;
  Vector a22_inv_b2;
  try {
    a22_inv_a21 = solve_linear(s.a22, s.a21);
    a22_inv_b2 = solve_linear(s.a22, s.b2);
  } catch (const SingularMatrixError&) {
    throw SingularMatrixError("summarize: stationary A22 is singular");
  }
  s.delta = s.a11 - s.a12 * a22_inv_a21;
  try {
    s.y_star = solve_linear(s.delta, Vector(s.b1 - s.a12 * a22_inv_b2));
  } catch (const SingularMatrixError&) {
    throw SingularMatrixError("summarize: Delta = A11 - A12 A22^{-1} A21 is singular");
  }
  s.x_star = solve_linear(s.a22, Vector(s.b2 - s.a21 * s.y_star));
  return s;
}

CenteredNoise centered_noise(const TwoTimeScaleProblem& problem,
                             const StationarySummary& summary) {
  const int n = problem.states();
  CenteredNoise noise;
  noise.b1.resize(n, problem.dim_y());
  noise.b2.resize(n, problem.dim_x());
  for (int o = 0; o < n; ++o) {
    const StateData& d = problem.state(o);
    noise.b1.row(o) = (d.b1 - summary.b1 + (summary.a11 - d.a11) * summary.y_star +
                       (summary.a12 - d.a12) * summary.x_star)
                          .transpose();
    noise.b2.row(o) = (d.b2 - summary.b2 + (summary.a21 - d.a21) * summary.y_star +
                       (summary.a22 - d.a22) * summary.x_star)
                          .transpose();
  }
  return noise;
}

CenteredNoise centered_noise(const TwoTimeScaleProblem& problem) {
  return centered_noise(problem, summarize(problem));
}

std::pair<Vector, Vector> hat_coordinates(const StationarySummary& summary,
                                          const Vector& y, const Vector& x) {
  const Vector y_err = y - summary.y_star;
  Vector yhat = y_err;
  Vector xhat = x - summary.x_star + solve_linear(summary.a22, Matrix(summary.a21 * y_err));
  return {std::move(yhat), std::move(xhat)};
}

ValidationReport validate(const TwoTimeScaleProblem& problem, const StepSchedule& schedule) {
  ValidationReport report;
  auto add = [&report](std::string name, bool pass, std::string detail) {
    report.checks.push_back({std::move(name), pass, std::move(detail)});
  };

  StationarySummary s;
  try {
    s = summarize(problem);
  } catch (const SingularMatrixError& e) {
    add("stationary summary", false, e.what());
    return report;
  }

  add("-A22 Hurwitz", is_hurwitz(Matrix(-s.a22)), "stationary fast-scale drift");
  add("-Delta Hurwitz", is_hurwitz(Matrix(-s.delta)), "Schur-complement slow drift");

  const bool xi_ok = schedule.xi > 0.5 && schedule.xi < 1.0;
  add("0.5 < xi < 1", xi_ok, "xi = " + std::to_string(schedule.xi));

  const int dy = problem.dim_y();
  const Matrix shifted = s.delta - Matrix::Identity(dy, dy) / (2.0 * schedule.beta);
  add("-(Delta - I/(2 beta)) Hurwitz", is_hurwitz(Matrix(-shifted)),
      "beta = " + std::to_string(schedule.beta));
  return report;
}

}  // namespace tts
