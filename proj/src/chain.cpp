#include "tts/chain.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tts/linalg.hpp"

namespace tts {

namespace {

constexpr double kRowSumTol = 1e-12;

std::vector<std::vector<int>> positive_adjacency(const Matrix& p) {
  const int n = static_cast<int>(p.rows());
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (p(i, j) > 0.0) adj[i].push_back(j);
    }
  }
  return adj;
}

bool is_irreducible(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  // Reachability closure from every state; n is small.
  for (int src = 0; src < n; ++src) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{src};
    seen[src] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    if (std::count(seen.begin(), seen.end(), 1) != n) return false;
  }
  return true;
}

// Period of an irreducible chain: gcd over all edges (u, v) of
// dist(u) + 1 - dist(v) for BFS distances from state 0.
int chain_period(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> dist(n, -1);
  std::vector<int> queue{0};
  dist[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int u = queue[head];
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  int g = 0;
  for (int u = 0; u < n; ++u) {
    for (int v : adj[u]) {
      g = std::gcd(g, std::abs(dist[u] + 1 - dist[v]));
    }
  }
  return g == 0 ? 1 : g;
}

Vector compute_stationary(const Matrix& p) {
  const int n = static_cast<int>(p.rows());
  // Stack (P' - I) with the normalization row 1'; the system is consistent
  // of rank n, so the least-squares solution is exact.
  Matrix system(n + 1, n);
  system.topRows(n) = p.transpose() - Matrix::Identity(n, n);
  system.bottomRows(1).setOnes();
  Vector rhs = Vector::Zero(n + 1);
  rhs(n) = 1.0;
  Vector mu = system.colPivHouseholderQr().solve(rhs);

  if ((p.transpose() * mu - mu).norm() > 1e-11 || mu.minCoeff() < -1e-11) {
    throw NumericalError(
        "stationary_distribution: null space of P' - I is ambiguous (chain reducible?)");
  }
  mu = mu.cwiseMax(0.0);
  mu /= mu.sum();
  return mu;
}

}  // namespace

ChainSpec::ChainSpec(Matrix transition, std::vector<std::string> labels)
    : transition_(std::move(transition)), labels_(std::move(labels)) {
  if (transition_.rows() != transition_.cols() || transition_.rows() == 0) {
    throw std::invalid_argument("ChainSpec: transition matrix must be square and nonempty");
  }
  require_finite(transition_, "ChainSpec transition");
  const int n = size();
  if (!labels_.empty() && static_cast<int>(labels_.size()) != n) {
    throw std::invalid_argument("ChainSpec: label count must match state count");
  }
  for (int i = 0; i < n; ++i) {
    if (transition_.row(i).minCoeff() < 0.0 || transition_.row(i).maxCoeff() > 1.0) {
      throw std::invalid_argument("ChainSpec: row " + std::to_string(i + 1) +
                                  " has entries outside [0, 1]");
    }
    const double sum = transition_.row(i).sum();
    if (std::abs(sum - 1.0) > kRowSumTol) {
      throw std::invalid_argument("ChainSpec: row " + std::to_string(i + 1) +
                                  " sums to " + std::to_string(sum) + ", expected 1");
    }
  }

  const auto adj = positive_adjacency(transition_);
  if (!is_irreducible(adj)) {
    throw std::invalid_argument("ChainSpec: chain is reducible");
  }
  if (chain_period(adj) != 1) {
    throw std::invalid_argument("ChainSpec: chain is periodic");
  }
  stationary_ = compute_stationary(transition_);
}

Vector stationary_distribution(const ChainSpec& chain) {
  return compute_stationary(chain.transition());
}

Matrix solve_poisson(const ChainSpec& chain, const Matrix& h_centered) {
  const int n = chain.size();
  if (h_centered.rows() != n) {
    throw std::invalid_argument("solve_poisson: one row per state required");
  }
  require_finite(h_centered, "solve_poisson h");
  const Vector& mu = chain.stationary();

  const Vector mean = h_centered.transpose() * mu;
  if (mean.cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument(
        "solve_poisson: h must have zero mu-weighted mean (center it first)");
  }

  // (I - P) hhat = h has rank n-1; appending the normalization row mu' makes
  // the stacked system uniquely solvable, exactly the two displayed
  // conditions of the equation.
  const Eigen::Index d = h_centered.cols();
  Matrix system(n + 1, n);
  system.topRows(n) = Matrix::Identity(n, n) - chain.transition();
  system.bottomRows(1) = mu.transpose();
  const auto qr = system.colPivHouseholderQr();

  Matrix hhat(n, d);
  Vector rhs = Vector::Zero(n + 1);
  for (Eigen::Index j = 0; j < d; ++j) {
    rhs.head(n) = h_centered.col(j);
    hhat.col(j) = qr.solve(rhs);
  }

  const Matrix residual =
      hhat - h_centered - chain.transition() * hhat;
  if (residual.cwiseAbs().maxCoeff() > 1e-10 ||
      (hhat.transpose() * mu).cwiseAbs().maxCoeff() > 1e-10) {
    throw NumericalError("solve_poisson: residual exceeds tolerance");
  }
  return hhat;
}

MixingProfile mixing_profile(const ChainSpec& chain, int k_max) {
  if (k_max < 1) {
    throw std::invalid_argument("mixing_profile: k_max must be >= 1");
  }
  const int n = chain.size();
  const Vector& mu = chain.stationary();

  MixingProfile profile;
  profile.dtv_curve.reserve(k_max);
  Matrix power = Matrix::Identity(n, n);
  int tau = -1;
  for (int k = 1; k <= k_max; ++k) {
    power = (power * chain.transition()).eval();
    double worst = 0.0;
    for (int o = 0; o < n; ++o) {
      worst = std::max(worst, 0.5 * (power.row(o).transpose() - mu).lpNorm<1>());
    }
    profile.dtv_curve.emplace_back(k, worst);
    if (tau < 0 && worst <= 0.25) tau = k;
  }
  if (tau < 0) {
    throw NumericalError("mixing_profile: d_TV did not reach 1/4 by k_max");
  }
  profile.tau_mix = tau;

  // Geometric rate: least-squares slope of log d_TV against k, restricted to
  // points above 1e-13 to avoid log of zero.
  double sk = 0, sy = 0, skk = 0, sky = 0;
  int count = 0;
  for (const auto& [k, d] : profile.dtv_curve) {
    if (d <= 1e-13) continue;
    const double y = std::log(d);
    sk += k;
    sy += y;
    skk += static_cast<double>(k) * k;
    sky += k * y;
    ++count;
  }
  double rho = 0.0;
  if (count >= 2) {
    const double slope = (count * sky - sk * sy) / (count * skk - sk * sk);
    rho = std::exp(slope);
  }
  profile.rho_hat = std::clamp(rho, 1e-12, 1.0 - 1e-12);

  double slem = 0.0;
  for (const Complex& lambda : eigenvalues(chain.transition())) {
    const double mod = std::abs(lambda);
    if (mod < 1.0 - 1e-9) slem = std::max(slem, mod);
  }
  profile.second_eigenvalue_modulus = slem;
  return profile;
}

std::vector<int> sample_path(const ChainSpec& chain, const ChainStart& start,
                             long horizon, SplitMix64& rng) {
  if (horizon < 0) {
    throw std::invalid_argument("sample_path: horizon must be nonnegative");
  }
  int state;
  if (start.state.has_value()) {
    state = *start.state;
    if (state < 0 || state >= chain.size()) {
      throw std::invalid_argument("sample_path: initial state out of range");
    }
  } else {
    state = rng.categorical(chain.stationary());
  }

  std::vector<int> path;
  path.reserve(static_cast<std::size_t>(horizon) + 1);
  path.push_back(state);
  for (long k = 0; k < horizon; ++k) {
    state = rng.categorical(chain.transition().row(state));
    path.push_back(state);
  }
  return path;
}

std::vector<int> sample_path(const ChainSpec& chain, const ChainStart& start,
                             long horizon, std::uint64_t seed,
                             std::uint64_t path_index) {
  SplitMix64 rng = SplitMix64::stream(seed, path_index);
  return sample_path(chain, start, horizon, rng);
}

}  // namespace tts
