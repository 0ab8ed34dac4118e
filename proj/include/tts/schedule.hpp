#pragma once

#include <cmath>
#include <stdexcept>

namespace tts {

/// Step-size schedule alpha_k = alpha/(k+k0)^xi (fast scale) and
/// beta_k = beta/(k+k0) (slow scale). Construction requires alpha, beta > 0,
/// k0 >= 1 and 0 < xi <= 1 so that both sequences are positive and strictly
/// decreasing; xi = 1 collapses the two scales onto one schedule, which the
/// single-time-scale comparison runs rely on. The 0.5 < xi < 1 range of the
/// optimal-rate regime is checked by validate(), not enforced here, because
/// the instability experiments deliberately leave it.
struct StepSchedule {
  double alpha = 1.0;
  double beta = 1.0;
  double xi = 0.75;
  double k0 = 1.0;

  StepSchedule() = default;
  StepSchedule(double alpha_in, double beta_in, double xi_in, double k0_in)
      : alpha(alpha_in), beta(beta_in), xi(xi_in), k0(k0_in) {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
      throw std::invalid_argument("StepSchedule: alpha and beta must be positive");
    }
    if (!(xi > 0.0) || !(xi <= 1.0)) {
      throw std::invalid_argument("StepSchedule: xi must be in (0, 1]");
    }
    if (!(k0 >= 1.0)) {
      throw std::invalid_argument("StepSchedule: k0 must be >= 1");
    }
  }

  double alpha_at(long k) const { return alpha / std::pow(k + k0, xi); }
  double beta_at(long k) const { return beta / (k + k0); }
};

}  // namespace tts
