#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "tts/config.hpp"
#include "tts/engine.hpp"
#include "tts/linalg.hpp"
#include "tts/rl.hpp"
#include "tts/theory.hpp"

using namespace tts;

namespace {

MDPSpec random_mdp(SplitMix64& rng, int n_states, int n_actions, double gamma) {
  std::vector<Matrix> transitions;
  for (int a = 0; a < n_actions; ++a) {
    transitions.push_back(test::random_stochastic(rng, n_states));
  }
  Matrix rewards = test::random_matrix(rng, n_states, n_actions, 1.0);
  return MDPSpec(std::move(transitions), std::move(rewards), gamma);
}

// Row-stochastic policy matrices with full support.
Matrix random_policy(SplitMix64& rng, int n_states, int n_actions) {
  Matrix p(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    double sum = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      p(s, a) = 0.1 + rng.uniform01();
      sum += p(s, a);
    }
    p.row(s) /= sum;
  }
  return p;
}

ExperimentConfig load_rl_preset() { return parse_config(test::read_preset("rl_tdc.cfg")); }

}  // namespace

TEST_CASE("policy coverage violations are construction errors") {
  Matrix behavior(1, 2), target(1, 2);
  behavior << 1.0, 0.0;
  target << 0.5, 0.5;
  CHECK_THROWS_AS(PolicyPair(behavior, target), std::invalid_argument);
}

TEST_CASE("rank-deficient features are rejected") {
  Matrix phi(3, 2);
  phi << 1, 2, 2, 4, 3, 6;
  CHECK_THROWS_AS(FeatureMap{phi}, std::invalid_argument);
}

TEST_CASE("single-action tuple chain is isomorphic to the state chain") {
  SplitMix64 rng(71);
  const Matrix p = test::random_stochastic(rng, 3);
  MDPSpec mdp({p}, Matrix::Zero(3, 1), 0.5);
  const Matrix behavior = Matrix::Ones(3, 1);
  const TupleChain tc = tuple_chain(mdp, behavior);

  const ChainSpec state_chain(p);
  // Tuple (s, 0, s') occurs with mass mu(s) P(s, s'); marginalizing the
  // first coordinate recovers the state stationary law.
  Vector marginal = Vector::Zero(3);
  for (int i = 0; i < tc.chain.size(); ++i) {
    marginal(tc.tuples[static_cast<std::size_t>(i)][0]) += tc.chain.stationary()(i);
  }
  CHECK((marginal - state_chain.stationary()).norm() < 1e-10);
}

TEST_CASE("tuple-chain stationary law factorizes") {
  SplitMix64 rng(72);
  const MDPSpec mdp = random_mdp(rng, 3, 2, 0.7);
  const Matrix behavior = random_policy(rng, 3, 2);
  const TupleChain tc = tuple_chain(mdp, behavior);

  const ChainSpec state_chain([&] {
    Matrix kernel = Matrix::Zero(3, 3);
    for (int a = 0; a < 2; ++a) {
      kernel += behavior.col(a).asDiagonal() * mdp.transitions[static_cast<std::size_t>(a)];
    }
    return kernel;
  }());
  for (int i = 0; i < tc.chain.size(); ++i) {
    const auto [s, a, s2] = tc.tuples[static_cast<std::size_t>(i)];
    const double expected = state_chain.stationary()(s) * behavior(s, a) *
                            mdp.transitions[static_cast<std::size_t>(a)](s, s2);
    CHECK(tc.chain.stationary()(i) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("uniform behavior over a complete-graph MDP gives uniform marginals") {
  const int n = 3;
  std::vector<Matrix> transitions = {Matrix::Constant(n, n, 1.0 / n),
                                     Matrix::Constant(n, n, 1.0 / n)};
  MDPSpec mdp(std::move(transitions), Matrix::Zero(n, 2), 0.5);
  const Matrix behavior = Matrix::Constant(n, 2, 0.5);
  const TupleChain tc = tuple_chain(mdp, behavior);
  CHECK(tc.chain.size() == n * 2 * n);
  for (int i = 0; i < tc.chain.size(); ++i) {
    CHECK(tc.chain.stationary()(i) == doctest::Approx(1.0 / (n * 2 * n)).epsilon(1e-10));
  }
}

TEST_CASE("zero-mass tuples are pruned from the chain") {
  SplitMix64 rng(78);
  const MDPSpec mdp = random_mdp(rng, 3, 2, 0.5);
  // Behavior never plays action 2 in state 1; coverage holds because the
  // target avoids it there too.
  Matrix behavior(3, 2), target(3, 2);
  behavior << 1.0, 0.0, 0.5, 0.5, 0.4, 0.6;
  target << 1.0, 0.0, 0.3, 0.7, 0.5, 0.5;
  const PolicyPair policies(behavior, target);

  const TupleChain tc = tuple_chain(mdp, policies.behavior);
  CHECK(tc.chain.size() < 3 * 2 * 3);
  for (const auto& [s, a, s2] : tc.tuples) {
    CHECK(behavior(s, a) > 0.0);
    CHECK(mdp.transitions[static_cast<std::size_t>(a)](s, s2) > 0.0);
  }
  CHECK(tc.chain.stationary().minCoeff() > 0.0);
}

TEST_CASE("tabular on-policy stationary matrices match the Bellman structure") {
  SplitMix64 rng(73);
  const int n = 4;
  const MDPSpec mdp = random_mdp(rng, n, 2, 0.8);
  const Matrix policy = random_policy(rng, n, 2);
  const PolicyPair policies(policy, policy);  // on-policy: all ratios are one
  const FeatureMap features{Matrix::Identity(n, n)};

  const StationaryMatrices m = stationary_matrices(mdp, policies, features);
  Matrix p_pi = Matrix::Zero(n, n);
  for (int a = 0; a < 2; ++a) {
    p_pi += policy.col(a).asDiagonal() * mdp.transitions[static_cast<std::size_t>(a)];
  }
  const ChainSpec state_chain(p_pi);
  const Matrix d_mu = state_chain.stationary().asDiagonal();
  CHECK((m.a - d_mu * (Matrix::Identity(n, n) - mdp.gamma * p_pi)).norm() < 1e-10);
  CHECK((m.c - d_mu).norm() < 1e-10);
}

TEST_CASE("stationary matrices match a long sample average") {
  SplitMix64 rng(74);
  const MDPSpec mdp = random_mdp(rng, 3, 2, 0.6);
  const PolicyPair policies(random_policy(rng, 3, 2), random_policy(rng, 3, 2));
  Matrix phi(3, 2);
  phi << 1, 0, 0, 1, 1, 1;
  const FeatureMap features{phi};

  const StationaryMatrices exact = stationary_matrices(mdp, policies, features);
  const TupleChain tc = tuple_chain(mdp, policies.behavior);

  const long samples = 1000000;
  const auto path = sample_path(tc.chain, ChainStart::stationary(), samples, 99, 0);
  Matrix a_hat = Matrix::Zero(2, 2);
  Vector b_hat = Vector::Zero(2);
  for (long k = 0; k < samples; ++k) {
    const auto [s, a, s2] = tc.tuples[static_cast<std::size_t>(path[static_cast<std::size_t>(k)])];
    const double rho = policies.ratio(s, a);
    const Vector phi_s = phi.row(s).transpose();
    const Vector phi_s2 = phi.row(s2).transpose();
    a_hat += rho * phi_s * (phi_s - mdp.gamma * phi_s2).transpose();
    b_hat += rho * mdp.rewards(s, a) * phi_s;
  }
  a_hat /= static_cast<double>(samples);
  b_hat /= static_cast<double>(samples);
  // Loose 3-sigma-style band for a correlated average.
  CHECK((a_hat - exact.a).cwiseAbs().maxCoeff() < 0.01);
  CHECK((b_hat - exact.b_vec).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("compiled problems expose the per-algorithm slow drift") {
  const ExperimentConfig config = load_rl_preset();
  REQUIRE(config.rl.has_value());
  const auto& rl = *config.rl;
  const StationaryMatrices m = stationary_matrices(rl.mdp, rl.policies, rl.features);

  for (Algorithm algorithm : {Algorithm::Gtd, Algorithm::Gtd2, Algorithm::Tdc}) {
    const TwoTimeScaleProblem problem =
        compile(algorithm, rl.mdp, rl.policies, rl.features);
    const StationarySummary s = summarize(problem);
    CHECK((s.delta - algorithm_delta(algorithm, m)).norm() < 1e-10);

    // Common fixed point: theta* on the slow scale, zero on the fast one.
    const Vector theta = theta_star(rl.mdp, rl.policies, rl.features);
    CHECK((s.y_star - theta).norm() < 1e-9 * (1.0 + theta.norm()));
    CHECK(s.x_star.norm() < 1e-9);
  }

  // The TDC drift equals A' C^{-1} A through the off-policy identity
  // A = C - B'.
  CHECK((m.a - (m.c - m.b.transpose())).norm() < 1e-12);
  CHECK((algorithm_delta(Algorithm::Tdc, m) -
         m.a.transpose() * solve_linear(m.c, m.a))
            .norm() < 1e-10);
}

TEST_CASE("theta* reproduces the tabular on-policy value function") {
  SplitMix64 rng(75);
  const int n = 4;
  const MDPSpec mdp = random_mdp(rng, n, 2, 0.8);
  const Matrix policy = random_policy(rng, n, 2);
  const PolicyPair policies(policy, policy);
  const FeatureMap features{Matrix::Identity(n, n)};

  Matrix p_pi = Matrix::Zero(n, n);
  Vector r_pi = Vector::Zero(n);
  for (int a = 0; a < 2; ++a) {
    p_pi += policy.col(a).asDiagonal() * mdp.transitions[static_cast<std::size_t>(a)];
    r_pi += policy.col(a).cwiseProduct(mdp.rewards.col(a));
  }
  const Vector v_pi =
      (Matrix::Identity(n, n) - mdp.gamma * p_pi).partialPivLu().solve(r_pi);
  const Vector theta = theta_star(mdp, policies, features);
  CHECK((theta - v_pi).norm() < 1e-9 * (1.0 + v_pi.norm()));
}

TEST_CASE("zero rewards give a zero fixed point") {
  SplitMix64 rng(76);
  MDPSpec mdp = random_mdp(rng, 3, 2, 0.5);
  mdp.rewards.setZero();
  const PolicyPair policies(random_policy(rng, 3, 2), random_policy(rng, 3, 2));
  Matrix phi(3, 2);
  phi << 1, 0, 0, 1, 1, -1;
  CHECK(theta_star(mdp, policies, FeatureMap{phi}).norm() < 1e-12);
}

TEST_CASE("compiled GTD satisfies the identity fast-scale covariance system") {
  const ExperimentConfig config = load_rl_preset();
  const auto& rl = *config.rl;
  const TwoTimeScaleProblem problem = compile(Algorithm::Gtd, rl.mdp, rl.policies, rl.features);
  const NoiseCovariances g = gamma_via_poisson(problem);
  const AsymptoticCovariances s = sigma_triple(problem, g, 1.0);
  CHECK((s.sigma_x - 0.5 * g.gamma_x).norm() <= 1e-9 * (1.0 + g.gamma_x.norm()));
}

TEST_CASE("simulating the compiled TDC problem matches a direct update loop") {
  const ExperimentConfig config = load_rl_preset();
  const auto& rl = *config.rl;
  const TwoTimeScaleProblem problem = compile(Algorithm::Tdc, rl.mdp, rl.policies, rl.features);
  const StepSchedule schedule(1, 1, 0.75, 1);
  const long horizon = 10000;
  std::vector<long> cps;
  for (long k = 0; k <= horizon; k += 100) cps.push_back(k);

  const int d = rl.features.dim();
  const Vector theta0 = Vector::Constant(d, 0.75);
  const Vector omega0 = Vector::Constant(d, -0.5);
  const auto traj =
      run_two_timescale(problem, schedule, horizon, cps,
                        InitPolicy::fixed(theta0, omega0), ChainStart::stationary(), 13, 2);

  // Direct loop on the same sampled tuple sequence: the compiled problem
  // consumes one draw for the stationary start and one per transition, which
  // sample_path reproduces for the same (seed, path_index).
  const TupleChain tc = tuple_chain(rl.mdp, rl.policies.behavior);
  const auto path = sample_path(tc.chain, ChainStart::stationary(), horizon, 13, 2);
  Vector theta = theta0, omega = omega0;
  std::size_t next_cp = 0;
  for (long k = 0; k <= horizon; ++k) {
    if (next_cp < cps.size() && cps[next_cp] == k) {
      CHECK((traj.y_values[next_cp] - theta).norm() <= 1e-12 * (1.0 + theta.norm()));
      CHECK((traj.x_values[next_cp] - omega).norm() <= 1e-12 * (1.0 + omega.norm()));
      ++next_cp;
    }
    if (k == horizon) break;
    const auto [s, a, s2] = tc.tuples[static_cast<std::size_t>(path[static_cast<std::size_t>(k)])];
    const double rho = rl.policies.ratio(s, a);
    const Vector phi_s = rl.features.phi.row(s).transpose();
    const Vector phi_s2 = rl.features.phi.row(s2).transpose();
    const Matrix a_k = rho * phi_s * (phi_s - rl.mdp.gamma * phi_s2).transpose();
    const Matrix b_k = rl.mdp.gamma * rho * phi_s2 * phi_s.transpose();
    const Matrix c_k = phi_s * phi_s.transpose();
    const Vector b_vec = rho * rl.mdp.rewards(s, a) * phi_s;
    const double bk = schedule.beta_at(k);
    const double ak = schedule.alpha_at(k);
    const Vector theta_next = theta + bk * (b_vec - a_k * theta - b_k * omega);
    const Vector omega_next = omega + ak * (b_vec - a_k * theta - c_k * omega);
    theta = theta_next;
    omega = omega_next;
  }
}

TEST_CASE("precheck behaves like the generic validator") {
  const ExperimentConfig config = load_rl_preset();
  const auto& rl = *config.rl;

  // Large beta: the shift is negligible against a positive-definite drift.
  CHECK(precheck(Algorithm::Tdc, rl.mdp, rl.policies, rl.features, 1000.0).all_pass());

  // Beta below 1/(2 lambda_min) must fail the shifted test.
  const StationaryMatrices m = stationary_matrices(rl.mdp, rl.policies, rl.features);
  const Matrix delta = algorithm_delta(Algorithm::Gtd, m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (delta + delta.transpose()),
                                           Eigen::EigenvaluesOnly);
  const double beta_bad = 0.9 / (2.0 * es.eigenvalues().minCoeff());
  CHECK_FALSE(precheck(Algorithm::Gtd, rl.mdp, rl.policies, rl.features, beta_bad).all_pass());

  // Consistency with validate() on the compiled problem.
  const TwoTimeScaleProblem problem = compile(Algorithm::Tdc, rl.mdp, rl.policies, rl.features);
  const double beta = 1.0;
  CHECK(precheck(Algorithm::Tdc, rl.mdp, rl.policies, rl.features, beta).all_pass() ==
        validate(problem, StepSchedule(1, beta, 0.75, 1)).all_pass());
}
