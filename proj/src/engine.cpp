#include "tts/engine.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "tts/linalg.hpp"

namespace tts {

namespace {

struct StepTable {
  std::vector<double> alpha;
  std::vector<double> beta;
};

StepTable make_step_table(const StepSchedule& schedule, long horizon) {
  StepTable table;
  table.alpha.resize(static_cast<std::size_t>(horizon));
  table.beta.resize(static_cast<std::size_t>(horizon));
  for (long k = 0; k < horizon; ++k) {
    table.alpha[static_cast<std::size_t>(k)] = schedule.alpha_at(k);
    table.beta[static_cast<std::size_t>(k)] = schedule.beta_at(k);
  }
  return table;
}

void check_checkpoints(const std::vector<long>& checkpoints, long horizon) {
  long prev = -1;
  for (long c : checkpoints) {
    if (c <= prev || c < 0 || c > horizon) {
      throw std::invalid_argument(
          "checkpoints must be strictly increasing within [0, horizon]");
    }
    prev = c;
  }
}

Vector draw_init(const InitPolicy& init, int dim, const Vector& fixed, SplitMix64& rng) {
  switch (init.kind) {
    case InitPolicy::Kind::Zero:
      return Vector::Zero(dim);
    case InitPolicy::Kind::UniformBox: {
      Vector v(dim);
      for (int i = 0; i < dim; ++i) v(i) = rng.uniform(init.lo, init.hi);
      return v;
    }
    case InitPolicy::Kind::Fixed:
      if (fixed.size() != dim) {
        throw std::invalid_argument("InitPolicy::fixed: dimension mismatch");
      }
      return fixed;
  }
  throw std::logic_error("unreachable");
}

bool guard_tripped(const Vector& y, const Vector& x) {
  return !y.allFinite() || !x.allFinite() || y.norm() > kDivergenceGuard ||
         x.norm() > kDivergenceGuard;
}

// Shared driving loop: `step` advances (y, x) in place for iterate k; the
// chain state and checkpoint bookkeeping are identical across the three
// iterate families.
template <typename StepFn>
Trajectory drive(const ChainSpec& chain, long horizon,
                 const std::vector<long>& checkpoints, const ChainStart& start,
                 std::uint64_t seed, std::uint64_t path_index, Vector y, Vector x,
                 SplitMix64& rng, StepFn&& step) {
  Trajectory out;
  out.checkpoints = checkpoints;
  out.seed = seed;
  out.path_index = path_index;
  out.y_values.reserve(checkpoints.size());
  out.x_values.reserve(checkpoints.size());
  out.diverged.reserve(checkpoints.size());

  int state;
  if (start.state.has_value()) {
    if (*start.state < 0 || *start.state >= chain.size()) {
      throw std::invalid_argument("chain start state out of range");
    }
    state = *start.state;
  } else {
    state = rng.categorical(chain.stationary());
  }

  std::size_t next_cp = 0;
  bool dead = false;
  for (long k = 0; k <= horizon; ++k) {
    if (next_cp < checkpoints.size() && checkpoints[next_cp] == k) {
      out.y_values.push_back(y);
      out.x_values.push_back(x);
      out.diverged.push_back(dead);
      ++next_cp;
    }
    if (k == horizon || dead) {
      if (next_cp >= checkpoints.size()) break;
      continue;
    }
    step(k, state, y, x);
    if (guard_tripped(y, x)) {
      dead = true;
      out.divergence_step = k + 1;
    }
    state = rng.categorical(chain.transition().row(state));
  }
  return out;
}

Trajectory run_two_timescale_impl(const TwoTimeScaleProblem& problem,
                                  const StepTable& table, long horizon,
                                  const std::vector<long>& checkpoints,
                                  const InitPolicy& init, const ChainStart& start,
                                  std::uint64_t seed, std::uint64_t path_index) {
  check_checkpoints(checkpoints, horizon);
  SplitMix64 rng = SplitMix64::stream(seed, path_index);
  Vector y = draw_init(init, problem.dim_y(), init.y0, rng);
  Vector x = draw_init(init, problem.dim_x(), init.x0, rng);

  Vector y_next(problem.dim_y());
  Vector x_next(problem.dim_x());
  auto step = [&](long k, int state, Vector& yk, Vector& xk) {
    const StateData& d = problem.state(state);
    const double bk = table.beta[static_cast<std::size_t>(k)];
    const double ak = table.alpha[static_cast<std::size_t>(k)];
    y_next = d.b1;
    y_next.noalias() -= d.a11 * yk;
    y_next.noalias() -= d.a12 * xk;
    y_next *= bk;
    y_next += yk;
    x_next = d.b2;
    x_next.noalias() -= d.a21 * yk;
    x_next.noalias() -= d.a22 * xk;
    x_next *= ak;
    x_next += xk;
    yk.swap(y_next);
    xk.swap(x_next);
  };
  return drive(problem.chain(), horizon, checkpoints, start, seed, path_index,
               std::move(y), std::move(x), rng, step);
}

Trajectory run_single_timescale_impl(const TwoTimeScaleProblem& problem, double kappa,
                                     const StepTable& table, long horizon,
                                     const std::vector<long>& checkpoints,
                                     const InitPolicy& init, const ChainStart& start,
                                     std::uint64_t seed, std::uint64_t path_index) {
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("run_single_timescale: kappa must be positive");
  }
  check_checkpoints(checkpoints, horizon);
  SplitMix64 rng = SplitMix64::stream(seed, path_index);
  Vector y = draw_init(init, problem.dim_y(), init.y0, rng);
  Vector x = draw_init(init, problem.dim_x(), init.x0, rng);

  Vector y_next(problem.dim_y());
  Vector x_next(problem.dim_x());
  auto step = [&](long k, int state, Vector& yk, Vector& xk) {
    const StateData& d = problem.state(state);
    const double bk = table.beta[static_cast<std::size_t>(k)];
    // Stacked update with the lower block row scaled by kappa; both halves
    // share the single step size beta_k.
    y_next = d.b1;
    y_next.noalias() -= d.a11 * yk;
    y_next.noalias() -= d.a12 * xk;
    y_next *= bk;
    y_next += yk;
    x_next = d.b2;
    x_next.noalias() -= d.a21 * yk;
    x_next.noalias() -= d.a22 * xk;
    x_next *= bk * kappa;
    x_next += xk;
    yk.swap(y_next);
    xk.swap(x_next);
  };
  return drive(problem.chain(), horizon, checkpoints, start, seed, path_index,
               std::move(y), std::move(x), rng, step);
}

Trajectory run_polyak_impl(const ChainSpec& chain, const std::vector<Matrix>& a_tables,
                           const std::vector<Vector>& b_tables, const StepTable& table,
                           long horizon, const std::vector<long>& checkpoints,
                           const InitPolicy& init, const ChainStart& start,
                           std::uint64_t seed, std::uint64_t path_index) {
  if (static_cast<int>(a_tables.size()) != chain.size() ||
      static_cast<int>(b_tables.size()) != chain.size()) {
    throw std::invalid_argument("run_polyak: one A(o), b(o) pair per state required");
  }
  check_checkpoints(checkpoints, horizon);
  const int dim = static_cast<int>(b_tables.front().size());
  SplitMix64 rng = SplitMix64::stream(seed, path_index);
  Vector y = draw_init(init, dim, init.y0, rng);
  Vector x = draw_init(init, dim, init.x0, rng);

  Vector x_next(dim);
  auto step = [&](long k, int state, Vector& yk, Vector& xk) {
    const double ak = table.alpha[static_cast<std::size_t>(k)];
    x_next = b_tables[static_cast<std::size_t>(state)];
    x_next.noalias() -= a_tables[static_cast<std::size_t>(state)] * xk;
    x_next *= ak;
    x_next += xk;
    // Running average, maintained incrementally.
    yk += (xk - yk) / static_cast<double>(k + 1);
    xk.swap(x_next);
  };
  return drive(chain, horizon, checkpoints, start, seed, path_index, std::move(y),
               std::move(x), rng, step);
}

double psd_spectral_norm(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Error coordinates with the precomputed gain A22^{-1} A21.
std::pair<Vector, Vector> hat_pair(const StationarySummary& summary, const Matrix& gain,
                                   const Vector& y, const Vector& x) {
  Vector yhat = y - summary.y_star;
  Vector xhat = x - summary.x_star + gain * yhat;
  return {std::move(yhat), std::move(xhat)};
}

}  // namespace

InitPolicy InitPolicy::fixed(Vector y0, Vector x0) {
  InitPolicy p;
  p.kind = Kind::Fixed;
  p.y0 = std::move(y0);
  p.x0 = std::move(x0);
  return p;
}

std::pair<double, double> step_sizes(const StepSchedule& schedule, long k) {
  if (k < 0) throw std::invalid_argument("step_sizes: k must be nonnegative");
  return {schedule.alpha_at(k), schedule.beta_at(k)};
}

Trajectory run_two_timescale(const TwoTimeScaleProblem& problem,
                             const StepSchedule& schedule, long horizon,
                             const std::vector<long>& checkpoints,
                             const InitPolicy& init, const ChainStart& start,
                             std::uint64_t seed, std::uint64_t path_index) {
  return run_two_timescale_impl(problem, make_step_table(schedule, horizon), horizon,
                                checkpoints, init, start, seed, path_index);
}

Trajectory run_single_timescale(const TwoTimeScaleProblem& problem, double kappa,
                                const StepSchedule& schedule, long horizon,
                                const std::vector<long>& checkpoints,
                                const InitPolicy& init, const ChainStart& start,
                                std::uint64_t seed, std::uint64_t path_index) {
  return run_single_timescale_impl(problem, kappa, make_step_table(schedule, horizon),
                                   horizon, checkpoints, init, start, seed, path_index);
}

Trajectory run_polyak(const ChainSpec& chain, const std::vector<Matrix>& a_tables,
                      const std::vector<Vector>& b_tables, const StepSchedule& schedule,
                      long horizon, const std::vector<long>& checkpoints,
                      const InitPolicy& init, const ChainStart& start,
                      std::uint64_t seed, std::uint64_t path_index) {
  return run_polyak_impl(chain, a_tables, b_tables, make_step_table(schedule, horizon),
                         horizon, checkpoints, init, start, seed, path_index);
}

EnsembleStats monte_carlo(const TwoTimeScaleProblem& problem,
                          const StepSchedule& schedule, const SimOptions& options) {
  if (options.paths < 1) {
    throw std::invalid_argument("monte_carlo: paths must be >= 1");
  }
  check_checkpoints(options.checkpoints, options.horizon);

  const StationarySummary summary = summarize(problem);
  const Matrix hat_gain = solve_linear(summary.a22, summary.a21);  // A22^{-1} A21
  const StepTable table = make_step_table(schedule, options.horizon);
  const std::size_t n_cp = options.checkpoints.size();
  const std::size_t n_paths = static_cast<std::size_t>(options.paths);

  std::vector<Matrix> polyak_a;
  std::vector<Vector> polyak_b;
  if (options.mode == SimulationMode::Polyak) {
    // The averaging mode runs the fast-scale tables through run_polyak; that
    // is the coupled iteration only for the exact embedding A11 = I,
    // A12 = -I, A21 = 0, b1 = 0 in every state.
    const Matrix id = Matrix::Identity(problem.dim_y(), problem.dim_y());
    for (int o = 0; o < problem.states(); ++o) {
      const StateData& d = problem.state(o);
      if ((d.a11 - id).norm() != 0.0 || (d.a12 + id).norm() != 0.0 ||
          d.a21.norm() != 0.0 || d.b1.norm() != 0.0) {
        throw std::invalid_argument(
            "monte_carlo: polyak mode requires the averaging specialization "
            "(A11 = I, A12 = -I, A21 = 0, b1 = 0 per state)");
      }
      polyak_a.push_back(d.a22);
      polyak_b.push_back(d.b2);
    }
  }

  struct PathRecord {
    std::vector<Vector> yhat, xhat;
    std::vector<char> dead;
  };
  std::vector<PathRecord> records(n_paths);

  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Trajectory traj;
      switch (options.mode) {
        case SimulationMode::TwoTimescale:
          traj = run_two_timescale_impl(problem, table, options.horizon,
                                        options.checkpoints, options.init,
                                        options.start, options.seed, i);
          break;
        case SimulationMode::SingleTimescale:
          traj = run_single_timescale_impl(problem, options.kappa, table,
                                           options.horizon, options.checkpoints,
                                           options.init, options.start, options.seed, i);
          break;
        case SimulationMode::Polyak:
          traj = run_polyak_impl(problem.chain(), polyak_a, polyak_b, table,
                                 options.horizon, options.checkpoints, options.init,
                                 options.start, options.seed, i);
          break;
      }
      PathRecord& rec = records[i];
      rec.yhat.resize(n_cp);
      rec.xhat.resize(n_cp);
      rec.dead.resize(n_cp);
      for (std::size_t c = 0; c < n_cp; ++c) {
        auto [yh, xh] = hat_pair(summary, hat_gain, traj.y_values[c], traj.x_values[c]);
        rec.yhat[c] = std::move(yh);
        rec.xhat[c] = std::move(xh);
        rec.dead[c] = traj.diverged[c] ? 1 : 0;
      }
    }
  };

  const int pool = std::max(1, std::min<int>(options.workers, options.paths));
  if (pool == 1) {
    run_range(0, n_paths);
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (n_paths + pool - 1) / pool;
    for (int t = 0; t < pool; ++t) {
      const std::size_t begin = static_cast<std::size_t>(t) * chunk;
      const std::size_t end = std::min(n_paths, begin + chunk);
      if (begin >= end) break;
      threads.emplace_back(run_range, begin, end);
    }
    for (auto& th : threads) th.join();
  }

  const int dy = problem.dim_y();
  const int dx = problem.dim_x();
  EnsembleStats stats;
  stats.checkpoints = options.checkpoints;
  stats.path_count = options.paths;
  stats.alpha_k.resize(n_cp);
  stats.beta_k.resize(n_cp);
  stats.e_yy.resize(n_cp);
  stats.e_xy.resize(n_cp);
  stats.e_xx.resize(n_cp);
  stats.ratio_y.resize(n_cp);
  stats.ratio_x.resize(n_cp);
  stats.stderr_y.resize(n_cp);
  stats.diverged_paths.resize(n_cp);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> path_ratio(n_paths);
  for (std::size_t c = 0; c < n_cp; ++c) {
    const long k = options.checkpoints[c];
    const double ak = schedule.alpha_at(k);
    const double bk = schedule.beta_at(k);
    stats.alpha_k[c] = ak;
    stats.beta_k[c] = bk;

    Matrix sum_yy = Matrix::Zero(dy, dy);
    Matrix sum_xy = Matrix::Zero(dx, dy);
    Matrix sum_xx = Matrix::Zero(dx, dx);
    long alive = 0;
    // Ascending path order: the reduction is bitwise independent of the
    // worker count.
    for (std::size_t i = 0; i < n_paths; ++i) {
      const PathRecord& rec = records[i];
      if (rec.dead[c]) continue;
      const Vector& yh = rec.yhat[c];
      const Vector& xh = rec.xhat[c];
      sum_yy.noalias() += yh * yh.transpose();
      sum_xy.noalias() += xh * yh.transpose();
      sum_xx.noalias() += xh * xh.transpose();
      path_ratio[static_cast<std::size_t>(alive)] = yh.squaredNorm() / bk;
      ++alive;
    }
    stats.diverged_paths[c] = options.paths - alive;
    if (alive == 0) {
      stats.e_yy[c] = Matrix::Constant(dy, dy, nan);
      stats.e_xy[c] = Matrix::Constant(dx, dy, nan);
      stats.e_xx[c] = Matrix::Constant(dx, dx, nan);
      stats.ratio_y[c] = nan;
      stats.ratio_x[c] = nan;
      stats.stderr_y[c] = nan;
      continue;
    }
    stats.e_yy[c] = sum_yy / static_cast<double>(alive);
    stats.e_xy[c] = sum_xy / static_cast<double>(alive);
    stats.e_xx[c] = sum_xx / static_cast<double>(alive);
    stats.ratio_y[c] = psd_spectral_norm(stats.e_yy[c]) / bk;
    stats.ratio_x[c] = psd_spectral_norm(stats.e_xx[c]) / ak;

    if (alive >= 2) {
      double mean = 0.0;
      for (long i = 0; i < alive; ++i) mean += path_ratio[static_cast<std::size_t>(i)];
      mean /= static_cast<double>(alive);
      double ss = 0.0;
      for (long i = 0; i < alive; ++i) {
        const double dev = path_ratio[static_cast<std::size_t>(i)] - mean;
        ss += dev * dev;
      }
      stats.stderr_y[c] =
          std::sqrt(ss / static_cast<double>(alive - 1) / static_cast<double>(alive));
    } else {
      stats.stderr_y[c] = 0.0;
    }
  }
  return stats;
}

std::vector<long> log_checkpoints(long horizon, int per_decade) {
  if (horizon < 1 || per_decade < 1) {
    throw std::invalid_argument("log_checkpoints: horizon and per_decade must be >= 1");
  }
  std::vector<long> cps;
  for (int j = 0;; ++j) {
    const long v = std::llround(std::pow(10.0, static_cast<double>(j) / per_decade));
    if (v > horizon) break;
    if (cps.empty() || v > cps.back()) cps.push_back(v);
  }
  if (cps.empty() || cps.back() != horizon) cps.push_back(horizon);
  return cps;
}

}  // namespace tts
