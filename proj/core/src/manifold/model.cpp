#include "mgs/manifold/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mgs/manifold/prior_encoder.hpp"
#include "mgs/nn/optim.hpp"
#include "mgs/rng.hpp"

namespace mgs::manifold {

// ---- F ---------------------------------------------------------------------

EmbedderF::Pass EmbedderF::forward(const Matrix& x) const {
  Pass p;
  p.cache = net.forward_cached(x);
  const Matrix& u = p.cache.outputs;
  if (!normalize) {
    p.features = u;
    return p;
  }
  p.norms = u.rowwise().norm();
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    if (!(p.norms(i) > 1e-300)) throw NumericError("EmbedderF: zero-norm feature cannot be normalised");
  p.features = p.norms.cwiseInverse().asDiagonal() * u;
  return p;
}

Matrix EmbedderF::embed(const Matrix& x) const { return forward(x).features; }

nn::BackwardResult EmbedderF::backward(const Pass& pass, const Matrix& feature_grad) const {
  if (!normalize) return net.backward(pass.cache, feature_grad);
  const Matrix& z = pass.features;
  // d(u/|u|)^T g = (g - z (z . g)) / |u|
  Vector proj = z.cwiseProduct(feature_grad).rowwise().sum();
  Matrix du = feature_grad - proj.asDiagonal() * z;
  du = pass.norms.cwiseInverse().asDiagonal() * du;
  return net.backward(pass.cache, du);
}

// ---- g ---------------------------------------------------------------------

RelationNetG::Pass RelationNetG::forward(const Matrix& z) const {
  require(tau > 0.0, "RelationNetG: tau must be positive");
  Pass p;
  p.cache = phi.forward_cached(z);
  p.relations = (-pairwise_sq_distances(p.cache.outputs).array() / tau).exp().matrix();
  p.relations.diagonal().setOnes();
  return p;
}

Matrix RelationNetG::relations(const Matrix& z) const { return forward(z).relations; }

nn::BackwardResult RelationNetG::backward(const Pass& pass, const Matrix& relation_grad) const {
  const Matrix& r = pass.relations;
  require(relation_grad.rows() == r.rows() && relation_grad.cols() == r.cols(),
          "RelationNetG::backward: gradient shape mismatch");
  const Matrix& e = pass.cache.outputs;
  // dL/de_i = -2/tau * sum_j (G_ij + G_ji) R_ij (e_i - e_j)
  Matrix w = (relation_grad + relation_grad.transpose()).cwiseProduct(r);
  w.diagonal().setZero();
  Vector rows = w.rowwise().sum();
  Matrix de = (-2.0 / tau) * (rows.asDiagonal() * e - w * e);
  return phi.backward(pass.cache, de);
}

RelationLoss relation_loss(const RelationNetG& g, const Matrix& z, const RelationMatrix& prior) {
  require(prior.size() == z.rows(), "relation_loss: prior size must equal sample count");
  auto pass = g.forward(z);
  Matrix diff = pass.relations - prior.values();
  RelationLoss out;
  out.loss = diff.squaredNorm();
  if (!std::isfinite(out.loss)) throw NumericError("relation_loss: non-finite loss");
  auto back = g.backward(pass, 2.0 * diff);
  out.grads = std::move(back.params);
  out.feature_grad = std::move(back.input_grad);
  return out;
}

ManifoldModel::Mismatch ManifoldModel::relation_mismatch(const Matrix& x, const Matrix& target) const {
  require(target.rows() == x.rows() && target.cols() == x.rows(), "relation_mismatch: target must be n x n");
  auto fpass = embedder.forward(x);
  auto gpass = relation.forward(fpass.features);
  Matrix diff = gpass.relations - target;
  Mismatch out;
  out.value = diff.squaredNorm();
  Matrix dz = relation.backward(gpass, 2.0 * diff).input_grad;
  out.input_grad = embedder.backward(fpass, dz).input_grad;
  return out;
}

// ---- training --------------------------------------------------------------

ManifoldModel make_manifold_model(Eigen::Index data_dim, const ManifoldTrainConfig& cfg, Pcg32& rng) {
  require(data_dim > 0 && cfg.feature_dim > 0 && cfg.relation_dim > 0, "make_manifold_model: bad dims");
  ManifoldModel m;
  std::vector<Eigen::Index> fd{data_dim};
  fd.insert(fd.end(), cfg.embed_hidden.begin(), cfg.embed_hidden.end());
  fd.push_back(cfg.feature_dim);
  std::vector<nn::Activation> fa(cfg.embed_hidden.size(), nn::Activation::tanh);
  fa.push_back(nn::Activation::identity);
  m.embedder.net = nn::FeedforwardNet::make(fd, fa, rng);
  m.embedder.normalize = cfg.normalize;

  std::vector<Eigen::Index> gd{cfg.feature_dim};
  gd.insert(gd.end(), cfg.relation_hidden.begin(), cfg.relation_hidden.end());
  gd.push_back(cfg.relation_dim);
  std::vector<nn::Activation> ga(cfg.relation_hidden.size(), nn::Activation::tanh);
  ga.push_back(nn::Activation::identity);
  m.relation.phi = nn::FeedforwardNet::make(gd, ga, rng);
  m.relation.tau = cfg.relation_tau;
  return m;
}

namespace {

class BatchSampler {
 public:
  BatchSampler(Eigen::Index n, int batch, Pcg32& rng) : n_(n), batch_(batch), rng_(rng) {
    order_.resize(static_cast<std::size_t>(n));
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
  }

  std::vector<Eigen::Index> next() {
    if (n_ <= batch_) return order_;
    // Partial Fisher-Yates draw without replacement.
    std::vector<Eigen::Index> idx = order_;
    for (int i = 0; i < batch_; ++i) {
      auto j = i + static_cast<Eigen::Index>(rng_.below(static_cast<std::uint32_t>(n_ - i)));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(static_cast<std::size_t>(batch_));
    return idx;
  }

 private:
  Eigen::Index n_;
  int batch_;
  Pcg32& rng_;
  std::vector<Eigen::Index> order_;
};

Matrix gather(const Matrix& m, const std::vector<Eigen::Index>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
  return out;
}

void check_finite(double v, const char* stage, int step) {
  if (!std::isfinite(v))
    throw NumericError(std::string("train-manifold diverged in stage ") + stage + " at step " + std::to_string(step));
}

// One ascent step of F on L_M with memberships read from the (frozen) g.
double embed_ascent_step(ManifoldModel& m, const Matrix& x, const LmConfig& obj, double lr) {
  auto fpass = m.embedder.forward(x);
  Matrix rel = m.relation.relations(fpass.features);
  auto value = lm_objective(fpass.features, Memberships::from_relations(rel), obj);
  auto back = m.embedder.backward(fpass, -value.grad);
  Vector params = m.embedder.net.parameters();
  nn::sgd_step(lr, params, back.params.flatten());
  m.embedder.net.set_parameters(params);
  return value.value;
}

}  // namespace

ManifoldTrainResult train_manifold(const Matrix& data, const ManifoldTrainConfig& cfg) {
  const Eigen::Index n = data.rows();
  require(n >= 2, "train_manifold: need at least two samples");
  require(cfg.batch_size >= 2, "train_manifold: batch size must be >= 2");
  Pcg32 rng = derive_rng(cfg.seed, 41);
  ManifoldTrainResult result;
  ManifoldModel& m = result.model;
  m = make_manifold_model(data.cols(), cfg, rng);

  const Eigen::Index p = std::min({cfg.prior_dim, data.cols(), n});
  PriorEncoder enc = fit_prior_encoder(data, p);
  for (auto& w : enc.warnings) result.log.warnings.push_back(w);
  const Matrix prior_features = encode(enc, data);

  std::vector<int> kmeans_labels;
  double tau = cfg.prior_tau;
  if (cfg.relation_source == RelationSource::kmeans) {
    int k = std::min<int>(cfg.kmeans_k, static_cast<int>(n));
    kmeans_labels = kmeans(prior_features, k, cfg.seed).labels;
  } else if (!(tau > 0.0)) {
    Pcg32 sub_rng = derive_rng(cfg.seed, 43);
    BatchSampler sub(n, 512, sub_rng);
    tau = median_sq_distance(gather(prior_features, sub.next()));
  }

  BatchSampler batches(n, cfg.batch_size, rng);
  auto prior_for = [&](const std::vector<Eigen::Index>& idx) {
    if (cfg.relation_source == RelationSource::kmeans) {
      std::vector<int> labels;
      for (auto i : idx) labels.push_back(kmeans_labels[i]);
      return relations_from_labels(labels);
    }
    return prior_relations(gather(prior_features, idx), tau);
  };

  Vector g_params = m.relation.phi.parameters();
  auto adam = nn::AdamState::make(g_params.size(), cfg.relation_lr);
  auto relation_step = [&](const Matrix& z, const RelationMatrix& prior) {
    auto rl = relation_loss(m.relation, z, prior);
    nn::adam_step(adam, g_params, rl.grads.flatten());
    m.relation.phi.set_parameters(g_params);
    return rl.loss;
  };

  for (int s = 0; s < cfg.relation_steps; ++s) {
    auto idx = batches.next();
    Matrix z = m.embedder.embed(gather(data, idx));
    double loss = relation_step(z, prior_for(idx));
    check_finite(loss, "relation", s);
    result.log.relation_stage.push_back(loss);
  }

  for (int s = 0; s < cfg.embed_steps; ++s) {
    auto idx = batches.next();
    double v = embed_ascent_step(m, gather(data, idx), cfg.objective, cfg.embed_lr);
    check_finite(v, "embed", s);
    result.log.embed_stage.push_back(v);
  }

  for (int s = 0; s < cfg.joint_steps; ++s) {
    auto idx = batches.next();
    Matrix x = gather(data, idx);
    double loss = relation_step(m.embedder.embed(x), prior_for(idx));
    check_finite(loss, "joint", s);
    double v = embed_ascent_step(m, x, cfg.objective, cfg.embed_lr);
    check_finite(v, "joint", s);
    result.log.joint_relation.push_back(loss);
    result.log.joint_objective.push_back(v);
  }
  return result;
}

std::vector<double> train_embedder_supervised(EmbedderF& embedder, const Matrix& data, const Memberships& c,
                                              const LmConfig& cfg, int steps, double learning_rate) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(steps));
  Vector params = embedder.net.parameters();
  for (int s = 0; s < steps; ++s) {
    auto pass = embedder.forward(data);
    auto value = lm_objective(pass.features, c, cfg);
    check_finite(value.value, "supervised-embed", s);
    values.push_back(value.value);
    auto back = embedder.backward(pass, -value.grad);
    nn::sgd_step(learning_rate, params, back.params.flatten());
    embedder.net.set_parameters(params);
  }
  return values;
}

}  // namespace mgs::manifold
