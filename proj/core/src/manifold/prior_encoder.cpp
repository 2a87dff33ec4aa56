#include "mgs/manifold/prior_encoder.hpp"

#include <string>

namespace mgs::manifold {

PriorEncoder fit_prior_encoder(const Matrix& data, Eigen::Index p) {
  const Eigen::Index n = data.rows();
  const Eigen::Index dim = data.cols();
  require(p >= 1 && p <= dim, "fit_prior_encoder: need 1 <= p <= data dim");
  require(n >= p, "fit_prior_encoder: need at least p samples");

  PriorEncoder enc;
  enc.mean = data.colwise().mean().transpose();
  Matrix centred = data.rowwise() - enc.mean.transpose();
  Matrix cov = centred.transpose() * centred / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("fit_prior_encoder: eigendecomposition failed");

  // Eigen returns ascending eigenvalues.
  Vector values = eig.eigenvalues().reverse();
  Matrix vectors = eig.eigenvectors().rowwise().reverse();
  const double top = std::max(values(0), 0.0);
  Eigen::Index keep = p;
  while (keep > 1 && !(values(keep - 1) > 1e-12 * top)) --keep;
  if (keep < p)
    enc.warnings.push_back("prior encoder: degenerate covariance, reduced p from " + std::to_string(p) + " to " +
                           std::to_string(keep));
  enc.basis = vectors.leftCols(keep);
  enc.variances = values.head(keep);
  return enc;
}

Matrix encode(const PriorEncoder& enc, const Matrix& data) {
  require(data.cols() == enc.mean.size(), "encode: data dim mismatch");
  return (data.rowwise() - enc.mean.transpose()) * enc.basis;
}

}  // namespace mgs::manifold
