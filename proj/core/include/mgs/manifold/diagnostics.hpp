#pragma once

#include <string>
#include <vector>

#include "mgs/common.hpp"

namespace mgs::manifold {

struct Compactness {
  double trace_measure = 0.0;  // tr(M M^T) / (2n)
  double rate_measure = 0.0;   // 1/2 logdet(I + M M^T / n)
};

/// Columns of `m` (d x n) are the samples here, as in the coding-rate literature.
Compactness compactness(const Matrix& m);

struct ModeSpectrum {
  int label = 0;
  Eigen::Index count = 0;
  Vector singular_values;  // descending
  Eigen::Index rank = 0;   // singular values >= 10% of the largest
  double predicted = 0.0;  // sqrt(count / rank)
};

struct SubspaceReport {
  double max_coherence = 0.0;
  std::vector<ModeSpectrum> modes;
  std::vector<std::string> warnings;
};

/// Cross-mode coherence and per-mode spectra of features `z` (n x d, samples
/// as rows). Coherence of modes i, j is sigma_max(Z_i Z_j^T) / (|Z_i|_2 |Z_j|_2).
/// Modes with fewer than 2 samples are skipped with a warning.
SubspaceReport subspace_diagnostics(const Matrix& z, const std::vector<int>& labels,
                                    double rank_threshold = 0.1);

}  // namespace mgs::manifold
