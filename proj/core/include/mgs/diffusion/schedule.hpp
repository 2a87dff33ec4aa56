#pragma once

#include <vector>

#include "mgs/common.hpp"

namespace mgs::diffusion {

/// Forward/reverse coefficients of a discrete diffusion chain.
///
/// All arrays are indexed by the 1-based timestep t in [1, N]; slot 0 holds
/// the t = 0 convention (alpha_bar = 1, beta = 0).
struct NoiseSchedule {
  int steps = 0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;
  /// bar_beta_t = (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t) * beta_t
  std::vector<double> posterior_var;
  /// Posterior mean is coef_x0[t] * x0 + coef_xt[t] * x_t.
  std::vector<double> coef_x0;
  std::vector<double> coef_xt;

  void check_timestep(int t) const;
};

/// Builds the schedule from explicit per-step betas (beta[0] is t = 1).
NoiseSchedule make_schedule(const std::vector<double>& betas);

/// Betas linearly interpolated from `beta_start` (t = 1) to `beta_end` (t = N).
NoiseSchedule make_linear_schedule(int steps, double beta_start = 1e-4, double beta_end = 0.02);

/// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps
Matrix q_sample(const Matrix& x0, int t, const Matrix& eps, const NoiseSchedule& schedule);

struct Posterior {
  Matrix mean;
  double variance = 0.0;
};

Posterior posterior_params(const Matrix& x0, const Matrix& xt, int t, const NoiseSchedule& schedule);

/// Clean-sample estimate from a noise prediction:
/// x0_hat = (x_t - sqrt(1 - alpha_bar_t) eps_hat) / sqrt(alpha_bar_t).
Matrix tweedie_x0(const Matrix& xt, const Matrix& eps_hat, int t, const NoiseSchedule& schedule);

}  // namespace mgs::diffusion
