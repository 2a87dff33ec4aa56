#pragma once

#include <string_view>
#include <vector>

#include "mgs/common.hpp"
#include "mgs/manifold/relations.hpp"

namespace mgs::manifold {

enum class ObjectiveForm { trace, logdet };

ObjectiveForm objective_form_from_string(std::string_view s);
std::string_view to_string(ObjectiveForm f);

struct LmConfig {
  ObjectiveForm form = ObjectiveForm::logdet;
  /// Coding precision epsilon^2.
  double eps_sq = 0.5;
};

/// Membership diagonals C^j (one row per group, one column per sample) and the
/// group weights gamma_j used by the log-det form.
struct Memberships {
  Matrix diag;
  Vector gamma;

  Eigen::Index groups() const { return diag.rows(); }
  Eigen::Index samples() const { return diag.cols(); }

  /// Hard one-hot groups from labels in [0, k): gamma_j = n_j / n.
  static Memberships from_labels(const std::vector<int>& labels, int k);
  /// One group per sample with C^j = diag(R(j, :)). gamma_j = 1/n, so a hard
  /// block relation matrix reproduces the per-class objective exactly.
  static Memberships from_relations(const Matrix& relations);
};

struct ObjectiveValue {
  double value = 0.0;
  /// Gradient with respect to Z (same n x d shape, samples as rows).
  Matrix grad;
};

/// Rate-reduction style objective of the features Z (n x d, samples as rows).
///
/// logdet: 1/2 logdet(I + a Z^T Z) - sum_j gamma_j/2 logdet(I + a_j Z^T C^j Z)
///         with a = d / (n eps^2) and a_j = d / (tr(C^j) eps^2).
/// trace:  1/(2n) (tr(Z^T Z) - sum_j w_j tr(Z^T C^j Z)), w_j = n gamma_j / tr(C^j),
///         which is the plain per-class trace form for one-hot groups.
/// Groups with tr(C^j) = 0 contribute nothing.
ObjectiveValue lm_objective(const Matrix& z, const Memberships& c, const LmConfig& cfg);

/// 1/2 logdet(I + scale * A^T A) via Cholesky. A^T A + PSD keeps it well posed.
double half_logdet_identity_plus(const Matrix& gram, double scale);

}  // namespace mgs::manifold
