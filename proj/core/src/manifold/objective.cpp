#include "mgs/manifold/objective.hpp"

#include <cmath>
#include <string>

namespace mgs::manifold {

ObjectiveForm objective_form_from_string(std::string_view s) {
  if (s == "trace") return ObjectiveForm::trace;
  if (s == "logdet") return ObjectiveForm::logdet;
  throw ConfigError("unknown objective form '" + std::string(s) + "' (expected trace|logdet)");
}

std::string_view to_string(ObjectiveForm f) { return f == ObjectiveForm::trace ? "trace" : "logdet"; }

Memberships Memberships::from_labels(const std::vector<int>& labels, int k) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  require(n > 0 && k > 0, "Memberships::from_labels: empty input");
  Memberships m;
  m.diag = Matrix::Zero(k, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    require(labels[i] >= 0 && labels[i] < k, "Memberships::from_labels: label out of range");
    m.diag(labels[i], i) = 1.0;
  }
  m.gamma = m.diag.rowwise().sum() / static_cast<double>(n);
  return m;
}

Memberships Memberships::from_relations(const Matrix& relations) {
  require(relations.rows() == relations.cols() && relations.rows() > 0,
          "Memberships::from_relations: need a non-empty square matrix");
  Memberships m;
  m.diag = relations;
  m.gamma = Vector::Constant(relations.rows(), 1.0 / static_cast<double>(relations.rows()));
  return m;
}

namespace {

Eigen::LLT<Matrix> factor_identity_plus(const Matrix& gram, double scale) {
  Matrix s = scale * gram;
  s.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success)
    throw NumericError("lm_objective: I + PSD matrix failed to factor (non-finite features?)");
  return llt;
}

double half_logdet(const Eigen::LLT<Matrix>& llt) {
  return llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

double half_logdet_identity_plus(const Matrix& gram, double scale) {
  return half_logdet(factor_identity_plus(gram, scale));
}

ObjectiveValue lm_objective(const Matrix& z, const Memberships& c, const LmConfig& cfg) {
  const Eigen::Index n = z.rows();
  const auto d = static_cast<double>(z.cols());
  require(n > 0 && z.cols() > 0, "lm_objective: empty features");
  require(c.samples() == n, "lm_objective: membership columns must equal sample count");
  require(c.gamma.size() == c.groups(), "lm_objective: one gamma per group");
  require(cfg.eps_sq > 0.0, "lm_objective: eps^2 must be positive");
  if (!z.allFinite()) throw NumericError("lm_objective: non-finite features");

  ObjectiveValue out;
  const double nd = static_cast<double>(n);
  if (cfg.form == ObjectiveForm::trace) {
    out.value = z.squaredNorm();
    out.grad = z;
    for (Eigen::Index j = 0; j < c.groups(); ++j) {
      double tr = c.diag.row(j).sum();
      if (tr <= 0.0) continue;
      double w = nd * c.gamma(j) / tr;
      Vector cj = c.diag.row(j).transpose();
      out.value -= w * (cj.asDiagonal() * z).cwiseProduct(z).sum();
      out.grad -= w * (cj.asDiagonal() * z);
    }
    out.value /= 2.0 * nd;
    out.grad /= nd;
    return out;
  }

  const double alpha = d / (nd * cfg.eps_sq);
  Matrix gram = z.transpose() * z;
  auto llt = factor_identity_plus(gram, alpha);
  out.value = half_logdet(llt);
  // d/dZ 1/2 logdet(I + a Z^T Z) = a Z (I + a Z^T Z)^{-1}
  out.grad = alpha * llt.solve(z.transpose()).transpose();
  for (Eigen::Index j = 0; j < c.groups(); ++j) {
    double tr = c.diag.row(j).sum();
    if (tr <= 0.0) continue;
    double alpha_j = d / (tr * cfg.eps_sq);
    Vector cj = c.diag.row(j).transpose();
    Matrix cz = cj.asDiagonal() * z;
    auto llt_j = factor_identity_plus(z.transpose() * cz, alpha_j);
    out.value -= c.gamma(j) * half_logdet(llt_j);
    out.grad -= c.gamma(j) * alpha_j * llt_j.solve(cz.transpose()).transpose();
  }
  return out;
}

}  // namespace mgs::manifold
