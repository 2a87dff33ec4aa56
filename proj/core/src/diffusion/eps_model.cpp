#include "mgs/diffusion/eps_model.hpp"

#include <cmath>
#include <string>

#include "mgs/nn/optim.hpp"
#include "mgs/nn/time_embed.hpp"

namespace mgs::diffusion {

EpsModel::EpsModel(nn::FeedforwardNet net, int embed_dim) : net_(std::move(net)), embed_dim_(embed_dim) {
  require(embed_dim_ > 0 && embed_dim_ % 2 == 0, "EpsModel: embed dim must be positive and even");
  data_dim_ = net_.input_dim() - embed_dim_;
  require(data_dim_ > 0, "EpsModel: input dim must exceed embed dim");
  require(net_.output_dim() == data_dim_, "EpsModel: output dim must equal data dim");
}

EpsModel EpsModel::make(Eigen::Index data_dim, int embed_dim, const std::vector<Eigen::Index>& hidden,
                        nn::Activation activation, Pcg32& rng) {
  std::vector<Eigen::Index> dims{data_dim + embed_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(data_dim);
  std::vector<nn::Activation> acts(hidden.size(), activation);
  acts.push_back(nn::Activation::identity);
  return EpsModel(nn::FeedforwardNet::make(dims, acts, rng), embed_dim);
}

Matrix EpsModel::network_input(const Matrix& x, const std::vector<int>& timesteps) const {
  require(x.cols() == data_dim_, "EpsModel: input dim mismatch");
  require(static_cast<Eigen::Index>(timesteps.size()) == x.rows(), "EpsModel: one timestep per row");
  Matrix in(x.rows(), data_dim_ + embed_dim_);
  in.leftCols(data_dim_) = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    in.row(i).tail(embed_dim_) = nn::time_embed(timesteps[i], embed_dim_).transpose();
  return in;
}

Matrix EpsModel::network_input(const Matrix& x, int t) const {
  require(x.cols() == data_dim_, "EpsModel: input dim mismatch");
  Matrix in(x.rows(), data_dim_ + embed_dim_);
  in.leftCols(data_dim_) = x;
  in.rightCols(embed_dim_).rowwise() = nn::time_embed(t, embed_dim_).transpose();
  return in;
}

Matrix EpsModel::predict(const Matrix& x, int t) const { return net_.forward(network_input(x, t)); }

Matrix EpsModel::input_vjp(const Matrix& x, int t, const Matrix& upstream) const {
  auto cache = net_.forward_cached(network_input(x, t));
  return net_.backward(cache, upstream).input_grad.leftCols(data_dim_);
}

LossWeighting loss_weighting_from_string(std::string_view s) {
  if (s == "simple") return LossWeighting::simple;
  if (s == "eta") return LossWeighting::eta;
  throw ConfigError("unknown loss weighting '" + std::string(s) + "' (expected simple|eta)");
}

std::string_view to_string(LossWeighting w) { return w == LossWeighting::simple ? "simple" : "eta"; }

LossAndGrads training_loss(const EpsModel& model, const Matrix& x0, const std::vector<int>& timesteps,
                           const Matrix& eps, const NoiseSchedule& schedule, LossWeighting weighting) {
  const Eigen::Index n = x0.rows();
  require(n > 0, "training_loss: empty batch");
  require(eps.rows() == n && eps.cols() == x0.cols(), "training_loss: eps shape mismatch");
  require(static_cast<Eigen::Index>(timesteps.size()) == n, "training_loss: one timestep per sample");

  Matrix xt(n, x0.cols());
  Vector weight(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    int t = timesteps[i];
    schedule.check_timestep(t);
    double ab = schedule.alpha_bar[t];
    xt.row(i) = std::sqrt(ab) * x0.row(i) + std::sqrt(1.0 - ab) * eps.row(i);
    weight(i) = weighting == LossWeighting::simple
                    ? 1.0
                    : schedule.beta[t] * schedule.beta[t] / (schedule.alpha[t] * (1.0 - ab));
  }

  const auto& net = model.net();
  auto cache = net.forward_cached(model.network_input(xt, timesteps));
  Matrix residual = cache.outputs - eps;
  LossAndGrads out;
  for (Eigen::Index i = 0; i < n; ++i) {
    double li = weight(i) * residual.row(i).squaredNorm();
    if (!std::isfinite(li))
      throw NumericError("training_loss: non-finite loss at sample " + std::to_string(i));
    out.loss += li;
  }
  out.loss /= static_cast<double>(n);
  Matrix upstream = (2.0 / static_cast<double>(n)) * (weight.asDiagonal() * residual);
  out.grads = net.backward(cache, upstream).params;
  return out;
}

LossAndGrads training_loss(const EpsModel& model, const Matrix& x0, const NoiseSchedule& schedule, Pcg32& rng,
                           LossWeighting weighting) {
  std::vector<int> ts(x0.rows());
  for (auto& t : ts) t = 1 + static_cast<int>(rng.below(static_cast<std::uint32_t>(schedule.steps)));
  Matrix eps = rng.normal_matrix(x0.rows(), x0.cols());
  return training_loss(model, x0, ts, eps, schedule, weighting);
}

std::vector<double> train_eps_model(EpsModel& model, const Matrix& data, const NoiseSchedule& schedule,
                                    const DiffusionTrainConfig& cfg) {
  require(data.rows() > 0, "train_eps_model: empty dataset");
  require(cfg.steps >= 0 && cfg.batch_size > 0, "train_eps_model: invalid step/batch counts");
  Pcg32 rng = derive_rng(cfg.seed, 11);
  Vector params = model.net().parameters();
  auto adam = nn::AdamState::make(params.size(), cfg.learning_rate);
  std::vector<double> losses;
  losses.reserve(cfg.steps);
  Matrix batch(cfg.batch_size, data.cols());
  for (int step = 0; step < cfg.steps; ++step) {
    for (int i = 0; i < cfg.batch_size; ++i)
      batch.row(i) = data.row(rng.below(static_cast<std::uint32_t>(data.rows())));
    LossAndGrads lg;
    try {
      lg = training_loss(model, batch, schedule, rng, cfg.weighting);
    } catch (const NumericError& e) {
      throw NumericError("train-diffusion diverged at step " + std::to_string(step) + ": " + e.what());
    }
    losses.push_back(lg.loss);
    // Last quarter of training runs at a tenth of the base rate.
    adam.learning_rate = step >= (3 * cfg.steps) / 4 ? 0.1 * cfg.learning_rate : cfg.learning_rate;
    nn::adam_step(adam, params, lg.grads.flatten());
    model.set_parameters(params);
  }
  return losses;
}

}  // namespace mgs::diffusion
