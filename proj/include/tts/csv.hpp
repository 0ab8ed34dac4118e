#pragma once

#include <ostream>
#include <string>

#include "tts/engine.hpp"
#include "tts/types.hpp"

namespace tts {

/// One row per checkpoint with the stable header
///   k,alpha_k,beta_k,norm_Eyy,norm_Exy,norm_Exx,ratio_y,ratio_x,stderr_y,
///   diverged_paths,theory_norm_sigma_y
/// Numeric fields use `precision` significant digits (17 by default, which
/// round-trips doubles exactly). `theory_norm_sigma_y` repeats the
/// theoretical ||sigma_y||; pass NaN when the covariance system has no
/// solution at the configured beta.
void write_simulation_csv(std::ostream& out, const EnsembleStats& stats,
                          double theory_norm_sigma_y, int precision = 17);

/// The simulate schema plus the fixed-point and leading-term columns
/// theta_star_1..theta_star_d and trace_sigma_theta.
void write_rl_csv(std::ostream& out, const EnsembleStats& stats,
                  double theory_norm_sigma_y, const Vector& theta_star,
                  double trace_sigma_theta, int precision = 17);

/// A double rendered with the given number of significant digits.
std::string format_number(double value, int precision);

}  // namespace tts
