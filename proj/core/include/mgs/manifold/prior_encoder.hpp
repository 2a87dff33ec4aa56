#pragma once

#include <string>
#include <vector>

#include "mgs/common.hpp"

namespace mgs::manifold {

/// Linear stand-in for a pre-trained encoder: mean-centred projection onto the
/// top principal directions of the training data.
struct PriorEncoder {
  Vector mean;
  Matrix basis;       // D x p, orthonormal columns
  Vector variances;   // eigenvalues of the sample covariance, descending
  std::vector<std::string> warnings;

  Eigen::Index dim() const { return basis.cols(); }
};

/// Fits the encoder. Directions with variance below 1e-12 of the largest are
/// dropped (p shrinks) and a warning is recorded.
PriorEncoder fit_prior_encoder(const Matrix& data, Eigen::Index p);

Matrix encode(const PriorEncoder& enc, const Matrix& data);

}  // namespace mgs::manifold
