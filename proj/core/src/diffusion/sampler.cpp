#include "mgs/diffusion/sampler.hpp"

#include <cmath>
#include <string>

namespace mgs::diffusion {

SamplerKind sampler_kind_from_string(std::string_view s) {
  if (s == "ancestral") return SamplerKind::ancestral;
  if (s == "deterministic") return SamplerKind::deterministic;
  throw ConfigError("unknown sampler kind '" + std::string(s) + "' (expected ancestral|deterministic)");
}

std::string_view to_string(SamplerKind k) { return k == SamplerKind::ancestral ? "ancestral" : "deterministic"; }

std::vector<int> timestep_sequence(int total_steps, int sample_steps) {
  if (sample_steps < 2 || sample_steps > total_steps)
    throw ConfigError("sample_steps must lie in [2, " + std::to_string(total_steps) + "]");
  std::vector<int> ts(sample_steps);
  const double span = static_cast<double>(total_steps - 1) / static_cast<double>(sample_steps - 1);
  for (int i = 0; i < sample_steps; ++i)
    ts[i] = total_steps - static_cast<int>(std::lround(span * static_cast<double>(i)));
  ts.back() = 1;
  return ts;
}

Matrix ancestral_step(const Matrix& xt, int t_from, int t_to, const NoisePredictor& model,
                      const NoiseSchedule& schedule, const Matrix& z) {
  schedule.check_timestep(t_from);
  require(t_to >= 0 && t_to < t_from, "ancestral_step: need 0 <= t_to < t_from");
  double alpha, beta, var;
  if (t_to == t_from - 1) {
    alpha = schedule.alpha[t_from];
    beta = schedule.beta[t_from];
    var = schedule.posterior_var[t_from];
  } else {
    alpha = schedule.alpha_bar[t_from] / schedule.alpha_bar[t_to];
    beta = 1.0 - alpha;
    var = (1.0 - schedule.alpha_bar[t_to]) / (1.0 - schedule.alpha_bar[t_from]) * beta;
  }
  Matrix eps = model.predict(xt, t_from);
  Matrix next = (xt - (beta / std::sqrt(1.0 - schedule.alpha_bar[t_from])) * eps) / std::sqrt(alpha);
  if (t_to > 0) {
    require(z.rows() == xt.rows() && z.cols() == xt.cols(), "ancestral_step: noise shape mismatch");
    next += std::sqrt(var) * z;
  }
  return next;
}

Matrix deterministic_step(const Matrix& xt, int t_from, int t_to, const NoisePredictor& model,
                          const NoiseSchedule& schedule) {
  schedule.check_timestep(t_from);
  require(t_to >= 0 && t_to < t_from, "deterministic_step: need 0 <= t_to < t_from");
  Matrix eps = model.predict(xt, t_from);
  Matrix x0_hat = tweedie_x0(xt, eps, t_from, schedule);
  if (t_to == 0) return x0_hat;
  double ab_to = schedule.alpha_bar[t_to];
  return std::sqrt(ab_to) * x0_hat + std::sqrt(1.0 - ab_to) * eps;
}

Matrix sample_from(const NoisePredictor& model, const NoiseSchedule& schedule, const SamplerConfig& config,
                   Matrix x, Pcg32& rng, const GuidanceHook& hook) {
  require(x.cols() == model.data_dim(), "sample: state dim does not match model");
  const auto ts = timestep_sequence(schedule.steps, config.sample_steps);
  if (x.rows() == 0) return x;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const int t = ts[i];
    const int t_next = i + 1 < ts.size() ? ts[i + 1] : 0;
    Matrix next;
    if (config.kind == SamplerKind::ancestral) {
      Matrix z = t_next > 0 ? rng.normal_matrix(x.rows(), x.cols()) : Matrix::Zero(x.rows(), x.cols());
      next = ancestral_step(x, t, t_next, model, schedule, z);
    } else {
      next = deterministic_step(x, t, t_next, model, schedule);
    }
    if (hook) hook(x, t, t_next, static_cast<int>(i), next);
    if (!next.allFinite()) throw NumericError("sample: non-finite state after timestep " + std::to_string(t));
    x = std::move(next);
  }
  return x;
}

Matrix sample(const NoisePredictor& model, const NoiseSchedule& schedule, const SamplerConfig& config,
              Eigen::Index batch_size, const GuidanceHook& hook) {
  require(batch_size >= 0, "sample: negative batch size");
  Pcg32 rng = derive_rng(config.seed, 23);
  Matrix x = rng.normal_matrix(batch_size, model.data_dim());
  return sample_from(model, schedule, config, std::move(x), rng, hook);
}

}  // namespace mgs::diffusion
