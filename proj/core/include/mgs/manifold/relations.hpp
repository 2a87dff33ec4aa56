#pragma once

#include <cstdint>
#include <vector>

#include "mgs/common.hpp"

namespace mgs::manifold {

/// Symmetric n x n matrix of pairwise same-submanifold scores in [0, 1] with
/// unit diagonal. Row j doubles as the membership diagonal of C^j.
class RelationMatrix {
 public:
  RelationMatrix() = default;
  /// Validates the invariants (tolerance 1e-12 on symmetry and diagonal).
  explicit RelationMatrix(Matrix values);

  Eigen::Index size() const { return values_.rows(); }
  const Matrix& values() const { return values_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }

 private:
  Matrix values_;
};

/// Squared Euclidean distances between all rows.
Matrix pairwise_sq_distances(const Matrix& points);

/// Median of the off-diagonal pairwise squared distances (the default kernel
/// temperature). Returns 1 for fewer than two points or all-identical points.
double median_sq_distance(const Matrix& points);

/// Gaussian-kernel prior: R(i,j) = exp(-||z_i - z_j||^2 / tau).
RelationMatrix prior_relations(const Matrix& features, double tau);

/// Hard relations from a labelling: R(i,j) = 1 iff labels agree.
RelationMatrix relations_from_labels(const std::vector<int>& labels);

struct KMeansResult {
  std::vector<int> labels;
  Matrix centroids;
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Empty clusters are re-seeded at
/// the point farthest from its centroid.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iterations = 100);

RelationMatrix kmeans_relations(const Matrix& features, int k, std::uint64_t seed);

}  // namespace mgs::manifold
