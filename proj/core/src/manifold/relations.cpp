#include "mgs/manifold/relations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mgs/rng.hpp"

namespace mgs::manifold {

RelationMatrix::RelationMatrix(Matrix values) : values_(std::move(values)) {
  require(values_.rows() == values_.cols(), "RelationMatrix: must be square");
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    require(std::abs(values_(i, i) - 1.0) <= 1e-12, "RelationMatrix: diagonal must be 1");
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      double v = values_(i, j);
      require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "RelationMatrix: entries must lie in [0, 1]");
      require(std::abs(v - values_(j, i)) <= 1e-12, "RelationMatrix: must be symmetric");
    }
  }
}

Matrix pairwise_sq_distances(const Matrix& points) {
  const Eigen::Index n = points.rows();
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double v = (points.row(i) - points.row(j)).squaredNorm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

double median_sq_distance(const Matrix& points) {
  const Eigen::Index n = points.rows();
  if (n < 2) return 1.0;
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) v.push_back((points.row(i) - points.row(j)).squaredNorm());
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double med = *mid;
  if (v.size() % 2 == 0) {
    double lower = *std::max_element(v.begin(), mid);
    med = 0.5 * (med + lower);
  }
  return med > 0.0 ? med : 1.0;
}

RelationMatrix prior_relations(const Matrix& features, double tau) {
  require(tau > 0.0, "prior_relations: tau must be positive");
  Matrix r = (-pairwise_sq_distances(features).array() / tau).exp().matrix();
  r.diagonal().setOnes();
  return RelationMatrix(std::move(r));
}

RelationMatrix relations_from_labels(const std::vector<int>& labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  Matrix r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) r(i, j) = labels[i] == labels[j] ? 1.0 : 0.0;
  return RelationMatrix(std::move(r));
}

namespace {

Eigen::Index nearest(const Matrix& centroids, const Eigen::RowVectorXd& p, double* dist = nullptr) {
  Eigen::Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    double d = (centroids.row(c) - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iterations) {
  const Eigen::Index n = points.rows();
  require(k >= 1 && k <= n, "kmeans: need 1 <= k <= n");
  Pcg32 rng = derive_rng(seed, 31);
  KMeansResult out;
  out.centroids.resize(k, points.cols());

  // k-means++ seeding.
  out.centroids.row(0) = points.row(rng.below(static_cast<std::uint32_t>(n)));
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2(i) = (points.row(i) - out.centroids.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > target && d2(i) > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(static_cast<std::uint32_t>(n));
    }
    out.centroids.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      d2(i) = std::min(d2(i), (points.row(i) - out.centroids.row(c)).squaredNorm());
  }

  out.labels.assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    out.iterations = iter + 1;
    bool changed = false;
    Vector dist(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto c = static_cast<int>(nearest(out.centroids, points.row(i), &dist(i)));
      if (c != out.labels[i]) {
        out.labels[i] = c;
        changed = true;
      }
    }
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(out.labels[i]) += points.row(i);
      ++counts[out.labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        out.centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
        continue;
      }
      // Re-seed the empty cluster at the worst-served point.
      Eigen::Index far = 0;
      dist.maxCoeff(&far);
      out.centroids.row(c) = points.row(far);
      dist(far) = 0.0;
      out.labels[far] = c;
      changed = true;
    }
    if (!changed) break;
  }
  return out;
}

RelationMatrix kmeans_relations(const Matrix& features, int k, std::uint64_t seed) {
  return relations_from_labels(kmeans(features, k, seed).labels);
}

}  // namespace mgs::manifold
