#include "mgs/diffusion/schedule.hpp"

#include <cmath>
#include <string>

namespace mgs::diffusion {

void NoiseSchedule::check_timestep(int t) const {
  if (t < 1 || t > steps)
    throw ContractError("timestep " + std::to_string(t) + " outside [1, " + std::to_string(steps) + "]");
}

NoiseSchedule make_schedule(const std::vector<double>& betas) {
  require(betas.size() >= 2, "make_schedule: need at least 2 steps");
  NoiseSchedule s;
  s.steps = static_cast<int>(betas.size());
  const auto size = betas.size() + 1;
  s.beta.assign(size, 0.0);
  s.alpha.assign(size, 1.0);
  s.alpha_bar.assign(size, 1.0);
  s.posterior_var.assign(size, 0.0);
  s.coef_x0.assign(size, 0.0);
  s.coef_xt.assign(size, 0.0);
  for (int t = 1; t <= s.steps; ++t) {
    double b = betas[t - 1];
    if (!(b > 0.0 && b < 1.0)) throw ContractError("make_schedule: beta_t must lie in (0, 1)");
    s.beta[t] = b;
    s.alpha[t] = 1.0 - b;
    s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
    double one_minus_bar = 1.0 - s.alpha_bar[t];
    double one_minus_prev = 1.0 - s.alpha_bar[t - 1];
    s.posterior_var[t] = one_minus_prev / one_minus_bar * b;
    s.coef_x0[t] = std::sqrt(s.alpha_bar[t - 1]) * b / one_minus_bar;
    s.coef_xt[t] = std::sqrt(s.alpha[t]) * one_minus_prev / one_minus_bar;
  }
  return s;
}

NoiseSchedule make_linear_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 2) throw ContractError("make_linear_schedule: N must be >= 2");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
    throw ContractError("make_linear_schedule: need 0 < beta_start <= beta_end < 1");
  std::vector<double> betas(steps);
  for (int i = 0; i < steps; ++i)
    betas[i] = beta_start + (beta_end - beta_start) * static_cast<double>(i) / static_cast<double>(steps - 1);
  return make_schedule(betas);
}

Matrix q_sample(const Matrix& x0, int t, const Matrix& eps, const NoiseSchedule& schedule) {
  schedule.check_timestep(t);
  require(x0.rows() == eps.rows() && x0.cols() == eps.cols(), "q_sample: x0/eps shape mismatch");
  double ab = schedule.alpha_bar[t];
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

Posterior posterior_params(const Matrix& x0, const Matrix& xt, int t, const NoiseSchedule& schedule) {
  schedule.check_timestep(t);
  require(x0.rows() == xt.rows() && x0.cols() == xt.cols(), "posterior_params: x0/xt shape mismatch");
  return {schedule.coef_x0[t] * x0 + schedule.coef_xt[t] * xt, schedule.posterior_var[t]};
}

Matrix tweedie_x0(const Matrix& xt, const Matrix& eps_hat, int t, const NoiseSchedule& schedule) {
  schedule.check_timestep(t);
  require(xt.rows() == eps_hat.rows() && xt.cols() == eps_hat.cols(), "tweedie_x0: shape mismatch");
  double ab = schedule.alpha_bar[t];
  return (xt - std::sqrt(1.0 - ab) * eps_hat) / std::sqrt(ab);
}

}  // namespace mgs::diffusion
