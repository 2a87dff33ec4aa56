#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "mgs/common.hpp"
#include "mgs/diffusion/eps_model.hpp"
#include "mgs/diffusion/schedule.hpp"

namespace mgs::diffusion {

enum class SamplerKind { ancestral, deterministic };

SamplerKind sampler_kind_from_string(std::string_view s);
std::string_view to_string(SamplerKind k);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::ancestral;
  int sample_steps = 1000;
  std::uint64_t seed = 0;
};

/// Evenly spaced, strictly decreasing timesteps from N down to 1.
std::vector<int> timestep_sequence(int total_steps, int sample_steps);

/// One reverse step from t_from to t_to < t_from with the chain re-spaced over
/// the skipped steps. With t_to = t_from - 1 this is the standard DDPM step
/// x_{t-1} = (x_t - beta_t / sqrt(1 - ab_t) eps) / sqrt(alpha_t) + sqrt(bar_beta_t) z.
/// t_to = 0 denotes the clean sample and adds no noise.
Matrix ancestral_step(const Matrix& xt, int t_from, int t_to, const NoisePredictor& model,
                      const NoiseSchedule& schedule, const Matrix& z);

inline Matrix ancestral_step(const Matrix& xt, int t, const NoisePredictor& model, const NoiseSchedule& schedule,
                             const Matrix& z) {
  return ancestral_step(xt, t, t - 1, model, schedule, z);
}

/// Zero-stochasticity step: x_{t_to} = sqrt(ab_to) x0_hat + sqrt(1 - ab_to) eps.
Matrix deterministic_step(const Matrix& xt, int t_from, int t_to, const NoisePredictor& model,
                          const NoiseSchedule& schedule);

/// Called after each reverse step with the pre-step state x_t. It may modify
/// `x_next` in place; `step_index` counts denoising steps from 0.
using GuidanceHook =
    std::function<void(const Matrix& x_t, int t, int t_next, int step_index, Matrix& x_next)>;

/// Runs the reverse chain from x_N ~ N(0, I) using the configured kernel.
Matrix sample(const NoisePredictor& model, const NoiseSchedule& schedule, const SamplerConfig& config,
              Eigen::Index batch_size, const GuidanceHook& hook = {});

/// Same, starting from a caller-supplied x_N. The rng supplies per-step noise.
Matrix sample_from(const NoisePredictor& model, const NoiseSchedule& schedule, const SamplerConfig& config,
                   Matrix x, Pcg32& rng, const GuidanceHook& hook = {});

}  // namespace mgs::diffusion
