#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tts/problem.hpp"
#include "tts/schedule.hpp"
#include "tts/types.hpp"

namespace tts {

/// Iterate norms above this threshold mark the trajectory as diverged.
/// Divergent runs are recorded rather than rejected: the instability
/// experiments need them as data.
inline constexpr double kDivergenceGuard = 1e12;

/// How the iterates are initialized. Uniform-box draws come from the path's
/// own generator stream (slow coordinates first, then fast ones), so a single
/// path is reproducible in isolation from its (seed, path_index) pair.
struct InitPolicy {
  enum class Kind { Zero, UniformBox, Fixed };
  Kind kind = Kind::Zero;
  double lo = -5.0;
  double hi = 5.0;
  Vector y0, x0;

  static InitPolicy zero() { return {}; }
  static InitPolicy uniform_box(double lo, double hi) {
    InitPolicy p;
    p.kind = Kind::UniformBox;
    p.lo = lo;
    p.hi = hi;
    return p;
  }
  static InitPolicy fixed(Vector y0, Vector x0);
};

/// Iterate snapshots at the requested checkpoints. Once the divergence guard
/// trips, the iteration stops and the remaining checkpoints carry the flag
/// together with the first over-threshold iterate; flagged entries are
/// excluded from ensemble statistics.
struct Trajectory {
  std::vector<long> checkpoints;
  std::vector<Vector> y_values;
  std::vector<Vector> x_values;
  std::vector<bool> diverged;
  std::optional<long> divergence_step;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
};

/// Exact step sizes (alpha_k, beta_k) of the schedule.
std::pair<double, double> step_sizes(const StepSchedule& schedule, long k);

/// Coupled iteration driven by a sampled chain path:
///   y_{k+1} = y_k + beta_k (b1(O_k) - A11(O_k) y_k - A12(O_k) x_k)
///   x_{k+1} = x_k + alpha_k (b2(O_k) - A21(O_k) y_k - A22(O_k) x_k).
/// Deterministic in (seed, path_index); generator consumption order is
/// init draws, chain start (if stationary), then one draw per transition.
Trajectory run_two_timescale(const TwoTimeScaleProblem& problem,
                             const StepSchedule& schedule, long horizon,
                             const std::vector<long>& checkpoints,
                             const InitPolicy& init, const ChainStart& start,
                             std::uint64_t seed, std::uint64_t path_index);

/// Stacked single-step-size iteration on z = (y, x):
///   z_{k+1} = z_k + beta_k (b_kappa(O_k) - A_kappa(O_k) z_k),
/// where the lower blocks of A_kappa and b_kappa are scaled by kappa. With
/// kappa = alpha/beta this reproduces the coupled iteration run at xi = 1.
Trajectory run_single_timescale(const TwoTimeScaleProblem& problem, double kappa,
                                const StepSchedule& schedule, long horizon,
                                const std::vector<long>& checkpoints,
                                const InitPolicy& init, const ChainStart& start,
                                std::uint64_t seed, std::uint64_t path_index);

/// Linear SA with running-average output:
///   x_{k+1} = x_k + alpha_k (b(O_k) - A(O_k) x_k)
///   y_{k+1} = y_k + (x_k - y_k)/(k + 1),
/// the incremental form of y_{k+1} = sum_{i<=k} x_i / (k+1). `a_tables` and
/// `b_tables` hold one entry per chain state.
Trajectory run_polyak(const ChainSpec& chain, const std::vector<Matrix>& a_tables,
                      const std::vector<Vector>& b_tables, const StepSchedule& schedule,
                      long horizon, const std::vector<long>& checkpoints,
                      const InitPolicy& init, const ChainStart& start,
                      std::uint64_t seed, std::uint64_t path_index);

enum class SimulationMode { TwoTimescale, SingleTimescale, Polyak };

struct SimOptions {
  SimulationMode mode = SimulationMode::TwoTimescale;
  double kappa = 1.0;  // single-time-scale block scaling
  long paths = 1;
  long horizon = 0;
  std::vector<long> checkpoints;
  std::uint64_t seed = 0;
  InitPolicy init;
  ChainStart start = ChainStart::stationary();
  int workers = 1;
};

/// Ensemble moments of the error coordinates at each checkpoint: means of
/// yhat yhat', xhat yhat', xhat xhat' over the non-diverged paths, the
/// normalized ratios ||E_yy||/beta_k and ||E_xx||/alpha_k, and the standard
/// error of the per-path slow-scale ratio. Diverged paths are counted
/// separately and excluded from the means.
struct EnsembleStats {
  std::vector<long> checkpoints;
  std::vector<double> alpha_k, beta_k;
  std::vector<Matrix> e_yy, e_xy, e_xx;
  std::vector<double> ratio_y, ratio_x, stderr_y;
  std::vector<long> diverged_paths;
  long path_count = 0;
};

/// Runs `paths` independent trajectories (path i owns generator stream i) and
/// reduces their outer products in ascending path order, so the result is a
/// deterministic function of (problem, schedule, options) regardless of the
/// worker count.
EnsembleStats monte_carlo(const TwoTimeScaleProblem& problem,
                          const StepSchedule& schedule, const SimOptions& options);

/// Log-spaced checkpoints: round(10^(j/per_decade)) up to the horizon,
/// deduplicated, with the horizon always included.
std::vector<long> log_checkpoints(long horizon, int per_decade = 20);

}  // namespace tts
