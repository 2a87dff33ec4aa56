#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mgs/common.hpp"
#include "mgs/diffusion/schedule.hpp"
#include "mgs/nn/network.hpp"
#include "mgs/rng.hpp"

namespace mgs::diffusion {

/// Anything that predicts the injected noise of x_t at timestep t.
/// `input_vjp` returns upstream^T (d eps / d x) row by row, i.e. the gradient of
/// sum(upstream .* eps(x, t)) with respect to x.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual Eigen::Index data_dim() const = 0;
  virtual Matrix predict(const Matrix& x, int t) const = 0;
  virtual Matrix input_vjp(const Matrix& x, int t, const Matrix& upstream) const = 0;
};

/// eps_theta(x, t): a feedforward net fed with [x | time_embed(t)].
class EpsModel final : public NoisePredictor {
 public:
  EpsModel() = default;
  EpsModel(nn::FeedforwardNet net, int embed_dim);

  static EpsModel make(Eigen::Index data_dim, int embed_dim, const std::vector<Eigen::Index>& hidden,
                       nn::Activation activation, Pcg32& rng);

  Eigen::Index data_dim() const override { return data_dim_; }
  int embed_dim() const { return embed_dim_; }
  const nn::FeedforwardNet& net() const { return net_; }
  void set_parameters(const Vector& flat) { net_.set_parameters(flat); }

  /// Rows of x paired with per-row timesteps.
  Matrix network_input(const Matrix& x, const std::vector<int>& timesteps) const;
  Matrix network_input(const Matrix& x, int t) const;

  Matrix predict(const Matrix& x, int t) const override;
  Matrix input_vjp(const Matrix& x, int t, const Matrix& upstream) const override;

 private:
  nn::FeedforwardNet net_;
  int embed_dim_ = 0;
  Eigen::Index data_dim_ = 0;
};

enum class LossWeighting { simple, eta };

LossWeighting loss_weighting_from_string(std::string_view s);
std::string_view to_string(LossWeighting w);

struct LossAndGrads {
  double loss = 0.0;
  nn::ParamGrads grads;
};

/// Noise-prediction loss for given per-sample timesteps and noises:
/// mean_i w_i ||eps_i - eps_theta(sqrt(ab) x0_i + sqrt(1-ab) eps_i, t_i)||^2,
/// with w = 1 (simple) or beta_t^2 / (alpha_t (1 - alpha_bar_t)) (eta).
LossAndGrads training_loss(const EpsModel& model, const Matrix& x0, const std::vector<int>& timesteps,
                           const Matrix& eps, const NoiseSchedule& schedule, LossWeighting weighting);

/// Same, drawing t ~ U{1..N} and eps ~ N(0, I) per sample from `rng`.
LossAndGrads training_loss(const EpsModel& model, const Matrix& x0, const NoiseSchedule& schedule, Pcg32& rng,
                           LossWeighting weighting);

struct DiffusionTrainConfig {
  int steps = 4000;
  int batch_size = 256;
  double learning_rate = 2e-3;
  LossWeighting weighting = LossWeighting::simple;
  std::uint64_t seed = 0;
};

/// Adam on minibatches drawn with replacement; returns the per-step losses.
std::vector<double> train_eps_model(EpsModel& model, const Matrix& data, const NoiseSchedule& schedule,
                                    const DiffusionTrainConfig& cfg);

}  // namespace mgs::diffusion
