#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgs/common.hpp"
#include "mgs/manifold/objective.hpp"
#include "mgs/manifold/relations.hpp"
#include "mgs/nn/network.hpp"

namespace mgs::manifold {

/// F: data (D) -> features (d), optionally projected onto the unit sphere.
struct EmbedderF {
  nn::FeedforwardNet net;
  bool normalize = true;

  struct Pass {
    nn::ForwardCache cache;
    Vector norms;
    Matrix features;
  };

  Matrix embed(const Matrix& x) const;
  Pass forward(const Matrix& x) const;
  /// Returns parameter gradients and the gradient with respect to x.
  nn::BackwardResult backward(const Pass& pass, const Matrix& feature_grad) const;
};

/// g: pairwise relations R(i,j) = exp(-||phi(z_i) - phi(z_j)||^2 / tau) with a
/// shared embedding phi. Symmetric with unit diagonal by construction.
struct RelationNetG {
  nn::FeedforwardNet phi;
  double tau = 1.0;

  struct Pass {
    nn::ForwardCache cache;
    Matrix relations;
  };

  Matrix relations(const Matrix& z) const;
  Pass forward(const Matrix& z) const;
  /// Backpropagates dL/dR (any n x n matrix, not assumed symmetric).
  nn::BackwardResult backward(const Pass& pass, const Matrix& relation_grad) const;
};

struct RelationLoss {
  double loss = 0.0;
  nn::ParamGrads grads;
  Matrix feature_grad;
};

/// ||R_pre - R_g(Z)||_F^2 with gradients for g's parameters and for Z.
RelationLoss relation_loss(const RelationNetG& g, const Matrix& z, const RelationMatrix& prior);

/// H = g o F.
struct ManifoldModel {
  EmbedderF embedder;
  RelationNetG relation;

  Matrix relations(const Matrix& x) const { return relation.relations(embedder.embed(x)); }

  /// Value of ||target - H(x)||_F^2 and its gradient with respect to x.
  struct Mismatch {
    double value = 0.0;
    Matrix input_grad;
  };
  Mismatch relation_mismatch(const Matrix& x, const Matrix& target) const;
};

enum class RelationSource { learnable, kmeans };

struct ManifoldTrainConfig {
  Eigen::Index feature_dim = 8;
  std::vector<Eigen::Index> embed_hidden{64, 64};
  std::vector<Eigen::Index> relation_hidden{32, 32};
  Eigen::Index relation_dim = 8;
  double relation_tau = 1.0;
  bool normalize = true;
  Eigen::Index prior_dim = 8;
  /// Kernel temperature of the prior relations; <= 0 selects the median heuristic.
  double prior_tau = 0.0;
  LmConfig objective{};
  RelationSource relation_source = RelationSource::learnable;
  int kmeans_k = 10;
  int relation_steps = 300;
  int embed_steps = 300;
  int joint_steps = 200;
  double relation_lr = 1e-3;
  double embed_lr = 0.05;
  int batch_size = 128;
  std::uint64_t seed = 0;
};

struct ManifoldTrainLog {
  std::vector<double> relation_stage;  // L_con during stage 1
  std::vector<double> embed_stage;     // L_M during stage 2
  std::vector<double> joint_objective; // L_M during stage 3
  std::vector<double> joint_relation;  // L_con during stage 3
  std::vector<std::string> warnings;
};

struct ManifoldTrainResult {
  ManifoldModel model;
  ManifoldTrainLog log;
};

ManifoldModel make_manifold_model(Eigen::Index data_dim, const ManifoldTrainConfig& cfg, Pcg32& rng);

/// Three stages: g against the prior relations, then F against L_M with C read
/// from the frozen g, then alternating updates of both.
ManifoldTrainResult train_manifold(const Matrix& data, const ManifoldTrainConfig& cfg);

/// Trains F alone with fixed, known memberships (used to probe the optimum of
/// L_M directly). `steps` SGD iterations on the full batch.
std::vector<double> train_embedder_supervised(EmbedderF& embedder, const Matrix& data, const Memberships& c,
                                              const LmConfig& cfg, int steps, double learning_rate);

}  // namespace mgs::manifold
