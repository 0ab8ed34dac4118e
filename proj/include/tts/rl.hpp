#pragma once

#include <array>
#include <string>
#include <vector>

#include "tts/chain.hpp"
#include "tts/problem.hpp"
#include "tts/types.hpp"

namespace tts {

/// Tabular MDP: transitions[a] is the n_states x n_states matrix of
/// P(s'|s, a), rewards(s, a) the immediate reward, gamma the discount.
struct MDPSpec {
  int n_states = 0;
  int n_actions = 0;
  std::vector<Matrix> transitions;
  Matrix rewards;
  double gamma = 0.0;

  MDPSpec() = default;
  MDPSpec(std::vector<Matrix> transitions_in, Matrix rewards_in, double gamma_in);
};

/// Behavior and target policies as n_states x n_actions row-stochastic
/// matrices. Construction checks coverage:  pi(a|s) > 0 requires
/// pi_b(a|s) > 0, so every importance ratio is finite.
struct PolicyPair {
  Matrix behavior;
  Matrix target;

  PolicyPair() = default;
  PolicyPair(Matrix behavior_in, Matrix target_in);

  double ratio(int s, int a) const { return target(s, a) / behavior(s, a); }
};

/// Feature rows phi(s); the matrix must have full column rank.
struct FeatureMap {
  Matrix phi;  // n_states x d

  FeatureMap() = default;
  explicit FeatureMap(Matrix phi_in);
  int dim() const { return static_cast<int>(phi.cols()); }
};

enum class Algorithm { Gtd, Gtd2, Tdc };

std::string algorithm_name(Algorithm algorithm);

/// The Markov chain over observed tuples (s, a, s'), restricted to tuples of
/// positive stationary mass, with transition
///   P((s2,a2,s2') | (s,a,s')) = [s2 = s'] pi_b(a2|s') P(s2'|s', a2).
/// Its stationary distribution factorizes as mu(s,a,s') =
/// mu_b(s) pi_b(a|s) P(s'|s,a), which is verified at construction.
struct TupleChain {
  ChainSpec chain;
  std::vector<std::array<int, 3>> tuples;  // index -> (s, a, s')
};

TupleChain tuple_chain(const MDPSpec& mdp, const Matrix& behavior);

/// Stationary moments of the per-tuple sample matrices:
///   A = E[rho phi(S)(phi(S) - gamma phi(S'))'],  B = gamma E[rho phi(S') phi(S)'],
///   C = E[phi(S) phi(S)'],                       b = E[rho r(S,A) phi(S)].
struct StationaryMatrices {
  Matrix a;
  Matrix b;
  Matrix c;
  Vector b_vec;
};

StationaryMatrices stationary_matrices(const MDPSpec& mdp, const PolicyPair& policies,
                                       const FeatureMap& features);

/// Maps the chosen algorithm onto the coupled two-time-scale form over the
/// tuple chain, with theta on the slow scale and omega on the fast one:
///   GTD:  b1 = 0, A11 = 0,  A12 = -A_o', b2 = b_o, A21 = A_o, A22 = I
///   GTD2: same as GTD with A22 = C_o
///   TDC:  b1 = b_o, A11 = A_o, A12 = B_o, and the GTD2 fast scale,
/// where A_o, B_o, C_o, b_o are the sample matrices evaluated at tuple o.
TwoTimeScaleProblem compile(Algorithm algorithm, const MDPSpec& mdp,
                            const PolicyPair& policies, const FeatureMap& features);

/// theta* = A^{-1} b, the common fixed point of all three algorithms.
Vector theta_star(const MDPSpec& mdp, const PolicyPair& policies,
                  const FeatureMap& features);

/// Per-algorithm slow drift: A'A (GTD), A'C^{-1}A (GTD2), A - B C^{-1} A (TDC).
Matrix algorithm_delta(Algorithm algorithm, const StationaryMatrices& moments);

/// Advisory Hurwitz checks of the algorithm's fast drift and of the shifted
/// slow drift -(Delta_alg - I/(2 beta)) at the proposed beta.
ValidationReport precheck(Algorithm algorithm, const MDPSpec& mdp,
                          const PolicyPair& policies, const FeatureMap& features,
                          double beta);

}  // namespace tts
