#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "tts/chain.hpp"
#include "tts/config.hpp"
#include "tts/csv.hpp"
#include "tts/engine.hpp"
#include "tts/linalg.hpp"
#include "tts/theory.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

struct CommonFlags {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> xi;
  std::optional<double> beta;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_sim_flags) {
  cmd->add_option("config", flags.config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--xi", flags.xi, "override schedule xi");
  cmd->add_option("--beta", flags.beta, "override schedule beta");
  if (with_sim_flags) {
    cmd->add_option("--out", flags.out, "override output CSV path");
    cmd->add_option("--seed", flags.seed, "override the master seed");
    cmd->add_option("--workers", flags.workers, "worker pool size (0 = all cores)");
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tts::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

tts::ExperimentConfig load(const CommonFlags& flags) {
  tts::ExperimentConfig config = tts::parse_config(slurp(flags.config_path));
  if (flags.xi || flags.beta) {
    if (!config.schedule) {
      throw tts::ConfigError("--xi/--beta override requires a [schedule] section");
    }
    const tts::StepSchedule& s = *config.schedule;
    config.schedule = tts::StepSchedule(s.alpha, flags.beta.value_or(s.beta),
                                        flags.xi.value_or(s.xi), s.k0);
  }
  if (flags.seed) {
    if (!config.simulation) {
      throw tts::ConfigError("--seed override requires a [simulation] section");
    }
    config.simulation->seed = *flags.seed;
  }
  if (flags.out) {
    if (!config.output) config.output.emplace();
    config.output->path = *flags.out;
  }
  return config;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

const tts::TwoTimeScaleProblem& require_problem(const tts::ExperimentConfig& config) {
  if (!config.problem) {
    throw tts::ConfigError("config: missing section [problem]");
  }
  return *config.problem;
}

const tts::StepSchedule& require_schedule(const tts::ExperimentConfig& config) {
  if (!config.schedule) {
    throw tts::ConfigError("config: missing section [schedule]");
  }
  return *config.schedule;
}

tts::ExperimentConfig::SimulationSection require_simulation(
    const tts::ExperimentConfig& config) {
  if (!config.simulation) {
    throw tts::ConfigError("config: missing section [simulation]");
  }
  return *config.simulation;
}

double theory_sigma_y_norm(const tts::TwoTimeScaleProblem& problem, double beta) {
  try {
    const tts::NoiseCovariances gammas = tts::gamma_via_poisson(problem);
    const tts::AsymptoticCovariances sigmas = tts::sigma_triple(problem, gammas, beta);
    return tts::spectral_norm(sigmas.sigma_y);
  } catch (const tts::NumericalError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

void write_csv_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw tts::ConfigError("cannot write output file '" + path + "'");
  out << contents;
}

tts::EnsembleStats run_ensemble(const tts::ExperimentConfig& config,
                                const tts::StepSchedule& schedule, int workers) {
  const tts::TwoTimeScaleProblem& problem = require_problem(config);
  const auto sim = require_simulation(config);
  tts::SimOptions options;
  options.mode = sim.mode;
  options.kappa = sim.kappa;
  options.paths = sim.paths;
  options.horizon = sim.horizon;
  options.checkpoints = sim.checkpoints;
  options.seed = sim.seed;
  options.init = sim.init;
  options.start = sim.start;
  options.workers = resolve_workers(workers);
  return tts::monte_carlo(problem, schedule, options);
}

std::string print_matrix(const tts::Matrix& m) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << (i == 0 ? "[" : "                 ");
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << tts::format_number(m(i, j), 12) << (j + 1 < m.cols() ? " " : "");
    }
    out << (i + 1 < m.rows() ? "\n" : "]");
  }
  return out.str();
}

int cmd_simulate(const CommonFlags& flags) {
  const tts::ExperimentConfig config = load(flags);
  const tts::StepSchedule& schedule = require_schedule(config);
  const tts::EnsembleStats stats = run_ensemble(config, schedule, flags.workers);
  const double theory = theory_sigma_y_norm(require_problem(config), schedule.beta);

  std::ostringstream csv;
  const int precision = config.output ? config.output->precision : 17;
  tts::write_simulation_csv(csv, stats, theory, precision);
  if (config.output && !config.output->path.empty()) {
    write_csv_file(config.output->path, csv.str());
    const std::size_t last = stats.checkpoints.size() - 1;
    std::cout << "wrote " << config.output->path << "; final ratio_y = "
              << tts::format_number(stats.ratio_y[last], 6)
              << " (theory ||sigma_y|| = " << tts::format_number(theory, 6)
              << "), diverged paths " << stats.diverged_paths[last] << "/"
              << stats.path_count << "\n";
  } else {
    std::cout << csv.str();
  }
  return 0;
}

int cmd_sweep(const CommonFlags& flags) {
  tts::ExperimentConfig config = load(flags);
  if (!config.sweep) {
    throw tts::ConfigError("config: missing section [sweep]");
  }
  if (!config.output || config.output->path.empty()) {
    throw tts::ConfigError("config: sweep requires [output] path");
  }
  const tts::StepSchedule base = require_schedule(config);
  const std::string base_path =
      config.output->path.size() > 4 &&
              config.output->path.substr(config.output->path.size() - 4) == ".csv"
          ? config.output->path.substr(0, config.output->path.size() - 4)
          : config.output->path;

  std::ostringstream summary;
  summary << "parameter,value,final_ratio_y,final_ratio_x,final_diverged_paths,"
             "theory_norm_sigma_y\n";
  for (double value : config.sweep->values) {
    const bool is_xi = config.sweep->parameter == "xi";
    const tts::StepSchedule schedule(base.alpha, is_xi ? base.beta : value,
                                     is_xi ? value : base.xi, base.k0);
    const tts::EnsembleStats stats = run_ensemble(config, schedule, flags.workers);
    const double theory = theory_sigma_y_norm(require_problem(config), schedule.beta);

    std::ostringstream csv;
    tts::write_simulation_csv(csv, stats, theory, config.output->precision);
    const std::string path = base_path + "_" + config.sweep->parameter + "_" +
                             tts::format_number(value, 6) + ".csv";
    write_csv_file(path, csv.str());

    const std::size_t last = stats.checkpoints.size() - 1;
    summary << config.sweep->parameter << ',' << tts::format_number(value, 17) << ','
            << tts::format_number(stats.ratio_y[last], 17) << ','
            << tts::format_number(stats.ratio_x[last], 17) << ','
            << stats.diverged_paths[last] << ',' << tts::format_number(theory, 17)
            << '\n';
    std::cout << config.sweep->parameter << " = " << tts::format_number(value, 6)
              << ": final ratio_y = " << tts::format_number(stats.ratio_y[last], 6)
              << ", diverged " << stats.diverged_paths[last] << "/" << stats.path_count
              << "\n";
  }
  write_csv_file(base_path + "_summary.csv", summary.str());
  std::cout << "wrote " << base_path << "_summary.csv\n";
  return 0;
}

int cmd_theory(const CommonFlags& flags) {
  const tts::ExperimentConfig config = load(flags);
  const tts::TwoTimeScaleProblem& problem = require_problem(config);
  const tts::StepSchedule& schedule = require_schedule(config);

  const tts::StationarySummary summary = tts::summarize(problem);
  const tts::MixingProfile mixing = tts::mixing_profile(problem.chain(), 512);
  const tts::NoiseCovariances gp = tts::gamma_via_poisson(problem);
  const tts::NoiseCovariances ga = tts::gamma_via_autocovariance(problem);

  std::cout << "states           " << problem.states() << " (dy=" << problem.dim_y()
            << ", dx=" << problem.dim_x() << ")\n";
  std::cout << "mu               " << print_matrix(problem.chain().stationary().transpose())
            << "\n";
  std::cout << "tau_mix          " << mixing.tau_mix << " (rho_hat "
            << tts::format_number(mixing.rho_hat, 6) << ", |lambda_2| "
            << tts::format_number(mixing.second_eigenvalue_modulus, 6) << ")\n";
  std::cout << "Delta            " << print_matrix(summary.delta) << "\n";
  std::cout << "y*               " << print_matrix(summary.y_star.transpose()) << "\n";
  std::cout << "x*               " << print_matrix(summary.x_star.transpose()) << "\n";
  std::cout << "Gamma_x          " << print_matrix(gp.gamma_x) << "\n";
  std::cout << "Gamma_xy         " << print_matrix(gp.gamma_xy) << "\n";
  std::cout << "Gamma_y          " << print_matrix(gp.gamma_y) << "\n";
  std::cout << "route mismatch   "
            << tts::format_number(
                   std::max({(gp.gamma_x - ga.gamma_x).norm(),
                             (gp.gamma_xy - ga.gamma_xy).norm(),
                             (gp.gamma_y - ga.gamma_y).norm()}),
                   6)
            << " (poisson vs autocovariance)\n";

  const tts::AsymptoticCovariances sigmas =
      tts::sigma_triple(problem, gp, schedule.beta);
  const tts::Matrix drive = tts::drive_matrix(problem, gp, sigmas);
  std::cout << "Sigma_x          " << print_matrix(sigmas.sigma_x) << "\n";
  std::cout << "Sigma_xy         " << print_matrix(sigmas.sigma_xy) << "\n";
  std::cout << "Sigma_y          " << print_matrix(sigmas.sigma_y) << " at beta = "
            << tts::format_number(schedule.beta, 6) << "\n";
  std::cout << "||Sigma_y||      " << tts::format_number(tts::spectral_norm(sigmas.sigma_y), 12)
            << "\n";
  std::cout << "drive matrix     " << print_matrix(drive) << "\n";

  const tts::RateExponents rates = tts::rate_exponents(schedule, summary.delta);
  std::cout << "q_{Delta,beta}   " << tts::format_number(rates.q_delta_beta, 12)
            << " (canonical varrho " << tts::format_number(rates.varrho, 12) << ")\n";
  std::cout << "rate exponents   y " << tts::format_number(rates.exp_y, 12) << ", xy "
            << tts::format_number(rates.exp_xy, 12) << ", x "
            << tts::format_number(rates.exp_x, 12) << "\n";
  if (problem.dim_y() == 1 && schedule.beta > 0.5) {
    std::cout << "h(beta)          " << tts::format_number(tts::h_beta(schedule.beta), 12)
              << " (argmin over (0.5, 10] is "
              << tts::format_number(tts::optimal_beta_scalar(), 12) << ")\n";
  }
  return 0;
}

int cmd_validate(const CommonFlags& flags) {
  const tts::ExperimentConfig config = load(flags);
  const tts::ValidationReport report =
      tts::validate(require_problem(config), require_schedule(config));
  for (const auto& check : report.checks) {
    std::cout << (check.pass ? "PASS  " : "FAIL  ") << check.name;
    if (!check.detail.empty()) std::cout << "  (" << check.detail << ")";
    std::cout << "\n";
  }
  std::cout << (report.all_pass() ? "all assumptions satisfied"
                                  : "some assumptions violated (advisory)")
            << "\n";
  return 0;
}

int cmd_classify(const CommonFlags& flags) {
  const tts::ExperimentConfig config = load(flags);
  if (!config.blocks) {
    throw tts::ConfigError("config: missing section [blocks]");
  }
  const std::vector<double> grid =
      config.kappa_grid.empty() ? tts::default_kappa_grid() : config.kappa_grid;
  const tts::Classification result = tts::classify(*config.blocks, grid);

  std::ostringstream line;
  line << "B:" << (result.in_b ? "yes" : "no");
  if (result.witness_kappa) {
    line << "(kappa=" << tts::format_number(*result.witness_kappa, 6) << ")";
  }
  line << " C:" << (result.in_c ? "yes" : "no");
  line << " D:" << (result.in_d ? "yes" : "no");
  std::cout << line.str() << "\n";
  if (result.kappa_grid_exhausted) std::cout << "note: kappa grid exhausted\n";
  if (!result.notes.empty()) std::cout << "note: " << result.notes << "\n";
  return 0;
}

int cmd_rl(const CommonFlags& flags) {
  const tts::ExperimentConfig config = load(flags);
  if (!config.rl) {
    throw tts::ConfigError("config: missing section [mdp]");
  }
  const tts::StepSchedule& schedule = require_schedule(config);
  const auto& rl = *config.rl;

  const tts::ValidationReport pre =
      tts::precheck(rl.algorithm, rl.mdp, rl.policies, rl.features, schedule.beta);
  for (const auto& check : pre.checks) {
    std::cout << (check.pass ? "PASS  " : "FAIL  ") << check.name << "\n";
  }

  const tts::TwoTimeScaleProblem problem =
      tts::compile(rl.algorithm, rl.mdp, rl.policies, rl.features);
  const tts::Vector theta = tts::theta_star(rl.mdp, rl.policies, rl.features);

  double trace_sigma = std::numeric_limits<double>::quiet_NaN();
  double theory = std::numeric_limits<double>::quiet_NaN();
  try {
    const tts::NoiseCovariances gammas = tts::gamma_via_poisson(problem);
    const tts::AsymptoticCovariances sigmas =
        tts::sigma_triple(problem, gammas, schedule.beta);
    trace_sigma = sigmas.sigma_y.trace();
    theory = tts::spectral_norm(sigmas.sigma_y);
  } catch (const tts::NumericalError&) {
  }

  tts::ExperimentConfig sim_config = config;
  sim_config.problem = problem;
  const tts::EnsembleStats stats = run_ensemble(sim_config, schedule, flags.workers);

  std::ostringstream csv;
  const int precision = config.output ? config.output->precision : 17;
  tts::write_rl_csv(csv, stats, theory, theta, trace_sigma, precision);

  const std::size_t last = stats.checkpoints.size() - 1;
  const double k_final = static_cast<double>(stats.checkpoints[last]);
  const double k_mse = k_final * stats.e_yy[last].trace();
  std::cout << tts::algorithm_name(rl.algorithm) << ": theta* = "
            << print_matrix(theta.transpose()) << "\n";
  std::cout << "trace(Sigma_theta) = " << tts::format_number(trace_sigma, 12)
            << "; k E||theta_k - theta*||^2 at k=" << stats.checkpoints[last] << " = "
            << tts::format_number(k_mse, 12) << " (beta "
            << tts::format_number(schedule.beta, 6) << ")\n";
  if (config.output && !config.output->path.empty()) {
    write_csv_file(config.output->path, csv.str());
    std::cout << "wrote " << config.output->path << "\n";
  } else {
    std::cout << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linear two-time-scale stochastic approximation workbench"};
  app.require_subcommand(1);

  CommonFlags simulate_flags, sweep_flags, theory_flags, validate_flags, classify_flags,
      rl_flags;
  CLI::App* simulate = app.add_subcommand("simulate", "run one seeded ensemble, emit CSV");
  add_common(simulate, simulate_flags, true);
  CLI::App* sweep = app.add_subcommand("sweep", "vary xi or beta over a list of values");
  add_common(sweep, sweep_flags, true);
  CLI::App* theory = app.add_subcommand("theory", "print Gamma/Sigma/drive/rate tables");
  add_common(theory, theory_flags, false);
  CLI::App* validate = app.add_subcommand("validate", "check the standing assumptions");
  add_common(validate, validate_flags, false);
  CLI::App* classify = app.add_subcommand("classify", "set membership of a block system");
  add_common(classify, classify_flags, false);
  CLI::App* rl = app.add_subcommand("rl", "compile and simulate GTD/GTD2/TDC");
  add_common(rl, rl_flags, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(simulate_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags);
    if (theory->parsed()) return cmd_theory(theory_flags);
    if (validate->parsed()) return cmd_validate(validate_flags);
    if (classify->parsed()) return cmd_classify(classify_flags);
    if (rl->parsed()) return cmd_rl(rl_flags);
  } catch (const tts::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const tts::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumericalError;
  }
  return 0;
}
