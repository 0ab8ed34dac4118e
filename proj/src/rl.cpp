#include "tts/rl.hpp"

#include <Eigen/QR>

#include <cmath>

#include "tts/linalg.hpp"

namespace tts {

namespace {

constexpr double kRowSumTol = 1e-12;

void check_stochastic_rows(const Matrix& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m.row(i).minCoeff() < 0.0) {
      throw std::invalid_argument(std::string(what) + ": negative probability in row " +
                                  std::to_string(i + 1));
    }
    if (std::abs(m.row(i).sum() - 1.0) > kRowSumTol) {
      throw std::invalid_argument(std::string(what) + ": row " + std::to_string(i + 1) +
                                  " does not sum to 1");
    }
  }
}

// Chain over states induced by the behavior policy:
// P_b(s'|s) = sum_a pi_b(a|s) P(s'|s,a).
Matrix behavior_state_kernel(const MDPSpec& mdp, const Matrix& behavior) {
  Matrix kernel = Matrix::Zero(mdp.n_states, mdp.n_states);
  for (int a = 0; a < mdp.n_actions; ++a) {
    kernel += behavior.col(a).asDiagonal() * mdp.transitions[static_cast<std::size_t>(a)];
  }
  return kernel;
}

}  // namespace

MDPSpec::MDPSpec(std::vector<Matrix> transitions_in, Matrix rewards_in, double gamma_in)
    : n_states(static_cast<int>(rewards_in.rows())),
      n_actions(static_cast<int>(rewards_in.cols())),
      transitions(std::move(transitions_in)),
      rewards(std::move(rewards_in)),
      gamma(gamma_in) {
  if (n_states < 1 || n_actions < 1) {
    throw std::invalid_argument("MDPSpec: at least one state and one action required");
  }
  if (static_cast<int>(transitions.size()) != n_actions) {
    throw std::invalid_argument("MDPSpec: one transition matrix per action required");
  }
  for (int a = 0; a < n_actions; ++a) {
    const Matrix& p = transitions[static_cast<std::size_t>(a)];
    if (p.rows() != n_states || p.cols() != n_states) {
      throw std::invalid_argument("MDPSpec: transition matrix of action " +
                                  std::to_string(a + 1) + " has wrong shape");
    }
    require_finite(p, "MDP transitions");
    check_stochastic_rows(p, "MDP transitions");
  }
  require_finite(rewards, "MDP rewards");
  if (!(gamma > 0.0) || !(gamma < 1.0)) {
    throw std::invalid_argument("MDPSpec: gamma must lie strictly inside (0, 1)");
  }
}

PolicyPair::PolicyPair(Matrix behavior_in, Matrix target_in)
    : behavior(std::move(behavior_in)), target(std::move(target_in)) {
  if (behavior.rows() != target.rows() || behavior.cols() != target.cols()) {
    throw std::invalid_argument("PolicyPair: behavior/target shape mismatch");
  }
  require_finite(behavior, "behavior policy");
  require_finite(target, "target policy");
  check_stochastic_rows(behavior, "behavior policy");
  check_stochastic_rows(target, "target policy");
  for (Eigen::Index s = 0; s < behavior.rows(); ++s) {
    for (Eigen::Index a = 0; a < behavior.cols(); ++a) {
      if (target(s, a) > 0.0 && behavior(s, a) <= 0.0) {
        throw std::invalid_argument(
            "PolicyPair: coverage violated at state " + std::to_string(s + 1) +
            ", action " + std::to_string(a + 1) + " (importance ratio infinite)");
      }
    }
  }
}

FeatureMap::FeatureMap(Matrix phi_in) : phi(std::move(phi_in)) {
  require_finite(phi, "features");
  if (phi.rows() < phi.cols() || phi.cols() < 1) {
    throw std::invalid_argument("FeatureMap: need n_states >= d >= 1");
  }
  const auto qr = phi.colPivHouseholderQr();
  if (qr.rank() < phi.cols()) {
    throw std::invalid_argument("FeatureMap: feature matrix is column-rank deficient");
  }
}

std::string algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Gtd:
      return "GTD";
    case Algorithm::Gtd2:
      return "GTD2";
    case Algorithm::Tdc:
      return "TDC";
  }
  return "?";
}

TupleChain tuple_chain(const MDPSpec& mdp, const Matrix& behavior) {
  check_stochastic_rows(behavior, "behavior policy");

  // Stationary distribution over states under the behavior policy; needed
  // only to verify the factorization below, but its existence also certifies
  // the precondition that pi_b induces an ergodic state chain.
  const ChainSpec state_chain(behavior_state_kernel(mdp, behavior));
  const Vector& mu_states = state_chain.stationary();

  std::vector<std::array<int, 3>> tuples;
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      if (behavior(s, a) <= 0.0) continue;
      for (int s2 = 0; s2 < mdp.n_states; ++s2) {
        if (mdp.transitions[static_cast<std::size_t>(a)](s, s2) <= 0.0) continue;
        tuples.push_back({s, a, s2});
      }
    }
  }

  const int m = static_cast<int>(tuples.size());
  Matrix p = Matrix::Zero(m, m);
  std::vector<std::string> labels(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto [s, a, s2] = tuples[static_cast<std::size_t>(i)];
    labels[static_cast<std::size_t>(i)] = "(" + std::to_string(s + 1) + "," +
                                          std::to_string(a + 1) + "," +
                                          std::to_string(s2 + 1) + ")";
    for (int j = 0; j < m; ++j) {
      const auto [t, b, t2] = tuples[static_cast<std::size_t>(j)];
      if (t != s2) continue;
      p(i, j) = behavior(t, b) * mdp.transitions[static_cast<std::size_t>(b)](t, t2);
    }
  }

  TupleChain out{ChainSpec(std::move(p), std::move(labels)), std::move(tuples)};

  const Vector& mu = out.chain.stationary();
  for (int i = 0; i < m; ++i) {
    const auto [s, a, s2] = out.tuples[static_cast<std::size_t>(i)];
    const double expected =
        mu_states(s) * behavior(s, a) * mdp.transitions[static_cast<std::size_t>(a)](s, s2);
    if (std::abs(mu(i) - expected) > 1e-10) {
      throw NumericalError("tuple_chain: stationary distribution does not factorize");
    }
  }
  return out;
}

namespace {

// Sample matrices at one tuple o = (s, a, s').
struct TupleSample {
  Matrix a;  // rho phi(s)(phi(s) - gamma phi(s'))'
  Matrix b;  // gamma rho phi(s') phi(s)'
  Matrix c;  // phi(s) phi(s)'
  Vector b_vec;
};

TupleSample sample_at(const MDPSpec& mdp, const PolicyPair& policies,
                      const FeatureMap& features, const std::array<int, 3>& tuple) {
  const auto [s, a, s2] = tuple;
  const double rho = policies.ratio(s, a);
  const Vector phi_s = features.phi.row(s).transpose();
  const Vector phi_s2 = features.phi.row(s2).transpose();
  TupleSample out;
  out.a = rho * phi_s * (phi_s - mdp.gamma * phi_s2).transpose();
  out.b = mdp.gamma * rho * phi_s2 * phi_s.transpose();
  out.c = phi_s * phi_s.transpose();
  out.b_vec = rho * mdp.rewards(s, a) * phi_s;
  return out;
}

}  // namespace

StationaryMatrices stationary_matrices(const MDPSpec& mdp, const PolicyPair& policies,
                                       const FeatureMap& features) {
  const TupleChain tc = tuple_chain(mdp, policies.behavior);
  const Vector& mu = tc.chain.stationary();
  const int d = features.dim();

  StationaryMatrices out;
  out.a = Matrix::Zero(d, d);
  out.b = Matrix::Zero(d, d);
  out.c = Matrix::Zero(d, d);
  out.b_vec = Vector::Zero(d);
  for (int i = 0; i < tc.chain.size(); ++i) {
    const TupleSample sample = sample_at(mdp, policies, features, tc.tuples[static_cast<std::size_t>(i)]);
    out.a += mu(i) * sample.a;
    out.b += mu(i) * sample.b;
    out.c += mu(i) * sample.c;
    out.b_vec += mu(i) * sample.b_vec;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (out.c + out.c.transpose()));
  if (es.eigenvalues().minCoeff() < 1e-10) {
    throw NumericalError("stationary_matrices: C = E[phi phi'] is rank deficient");
  }
  return out;
}

TwoTimeScaleProblem compile(Algorithm algorithm, const MDPSpec& mdp,
                            const PolicyPair& policies, const FeatureMap& features) {
  TupleChain tc = tuple_chain(mdp, policies.behavior);
  const int d = features.dim();
  const Matrix id = Matrix::Identity(d, d);

  std::vector<StateData> data;
  data.reserve(static_cast<std::size_t>(tc.chain.size()));
  for (int i = 0; i < tc.chain.size(); ++i) {
    const TupleSample sample =
        sample_at(mdp, policies, features, tc.tuples[static_cast<std::size_t>(i)]);
    StateData sd;
    switch (algorithm) {
      case Algorithm::Gtd:
        sd.b1 = Vector::Zero(d);
        sd.a11 = Matrix::Zero(d, d);
        sd.a12 = -sample.a.transpose();
        sd.b2 = sample.b_vec;
        sd.a21 = sample.a;
        sd.a22 = id;
        break;
      case Algorithm::Gtd2:
        sd.b1 = Vector::Zero(d);
        sd.a11 = Matrix::Zero(d, d);
        sd.a12 = -sample.a.transpose();
        sd.b2 = sample.b_vec;
        sd.a21 = sample.a;
        sd.a22 = sample.c;
        break;
      case Algorithm::Tdc:
        sd.b1 = sample.b_vec;
        sd.a11 = sample.a;
        sd.a12 = sample.b;
        sd.b2 = sample.b_vec;
        sd.a21 = sample.a;
        sd.a22 = sample.c;
        break;
    }
    data.push_back(std::move(sd));
  }

  TwoTimeScaleProblem problem(std::move(tc.chain), std::move(data));

  // The compiled stationary means must reproduce the directly computed
  // moments, and Delta must match the algorithm's closed form.
  const StationaryMatrices moments = stationary_matrices(mdp, policies, features);
  const StationarySummary summary = summarize(problem);
  const Matrix expected_delta = algorithm_delta(algorithm, moments);
  if ((summary.delta - expected_delta).norm() > 1e-10 * (1.0 + expected_delta.norm())) {
    throw NumericalError("compile: Delta of the compiled problem mismatches " +
                         algorithm_name(algorithm) + " closed form");
  }
  return problem;
}

Vector theta_star(const MDPSpec& mdp, const PolicyPair& policies,
                  const FeatureMap& features) {
  const StationaryMatrices moments = stationary_matrices(mdp, policies, features);
  try {
    return solve_linear(moments.a, moments.b_vec);
  } catch (const SingularMatrixError&) {
    throw SingularMatrixError("theta_star: stationary matrix A is singular");
  }
}

Matrix algorithm_delta(Algorithm algorithm, const StationaryMatrices& moments) {
  switch (algorithm) {
    case Algorithm::Gtd:
      return moments.a.transpose() * moments.a;
    case Algorithm::Gtd2:
      return moments.a.transpose() * solve_linear(moments.c, moments.a);
    case Algorithm::Tdc:
      return moments.a - moments.b * solve_linear(moments.c, moments.a);
  }
  throw std::logic_error("unreachable");
}

ValidationReport precheck(Algorithm algorithm, const MDPSpec& mdp,
                          const PolicyPair& policies, const FeatureMap& features,
                          double beta) {
  const StationaryMatrices moments = stationary_matrices(mdp, policies, features);
  const Matrix delta = algorithm_delta(algorithm, moments);
  const int d = features.dim();

  ValidationReport report;
  const Matrix fast = algorithm == Algorithm::Gtd ? Matrix(Matrix::Identity(d, d))
                                                  : moments.c;
  report.checks.push_back({"-A22 Hurwitz", is_hurwitz(Matrix(-fast)),
                           algorithm == Algorithm::Gtd ? "A22 = I" : "A22 = C"});
  const Matrix shifted = delta - Matrix::Identity(d, d) / (2.0 * beta);
  report.checks.push_back({"-(Delta_" + algorithm_name(algorithm) + " - I/(2 beta)) Hurwitz",
                           is_hurwitz(Matrix(-shifted)),
                           "beta = " + std::to_string(beta)});
  return report;
}

}  // namespace tts
