#include "mgs/manifold/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mgs/manifold/objective.hpp"

namespace mgs::manifold {

Compactness compactness(const Matrix& m) {
  require(m.cols() > 0, "compactness: need at least one sample");
  const auto n = static_cast<double>(m.cols());
  Compactness c;
  c.trace_measure = m.squaredNorm() / (2.0 * n);
  // logdet(I_d + M M^T / n) == logdet(I_n + M^T M / n); use the smaller side.
  Matrix gram = m.rows() <= m.cols() ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
  c.rate_measure = half_logdet_identity_plus(gram, 1.0 / n);
  return c;
}

namespace {

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

}  // namespace

SubspaceReport subspace_diagnostics(const Matrix& z, const std::vector<int>& labels, double rank_threshold) {
  require(static_cast<Eigen::Index>(labels.size()) == z.rows(), "subspace_diagnostics: one label per sample");
  std::map<int, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < z.rows(); ++i) groups[labels[i]].push_back(i);

  SubspaceReport report;
  std::vector<Matrix> blocks;
  for (const auto& [label, idx] : groups) {
    if (idx.size() < 2) {
      report.warnings.push_back("mode " + std::to_string(label) + " has fewer than 2 samples; excluded");
      continue;
    }
    Matrix block(static_cast<Eigen::Index>(idx.size()), z.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) block.row(static_cast<Eigen::Index>(i)) = z.row(idx[i]);
    ModeSpectrum spec;
    spec.label = label;
    spec.count = block.rows();
    Eigen::JacobiSVD<Matrix> svd(block);
    spec.singular_values = svd.singularValues();
    double top = spec.singular_values.size() > 0 ? spec.singular_values(0) : 0.0;
    for (Eigen::Index k = 0; k < spec.singular_values.size(); ++k)
      if (top > 0.0 && spec.singular_values(k) >= rank_threshold * top) ++spec.rank;
    spec.predicted = spec.rank > 0 ? std::sqrt(static_cast<double>(spec.count) / static_cast<double>(spec.rank)) : 0.0;
    report.modes.push_back(std::move(spec));
    blocks.push_back(std::move(block));
  }

  for (std::size_t i = 0; i < blocks.size(); ++i) {
    double ni = spectral_norm(blocks[i]);
    for (std::size_t j = i + 1; j < blocks.size(); ++j) {
      double nj = spectral_norm(blocks[j]);
      if (ni <= 0.0 || nj <= 0.0) continue;
      double cross = spectral_norm(blocks[i] * blocks[j].transpose());
      report.max_coherence = std::max(report.max_coherence, cross / (ni * nj));
    }
  }
  return report;
}

}  // namespace mgs::manifold
