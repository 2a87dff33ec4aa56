#include "mgs/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mgs/rng.hpp"

namespace mgs::eval {

double avg_nn_distance(const Matrix& real, std::string* warning) {
  const Eigen::Index n = real.rows();
  require(n >= 2, "avg_nn_distance: need at least 2 real samples");
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      best = std::min(best, (real.row(i) - real.row(j)).squaredNorm());
    }
    total += std::sqrt(best);
  }
  double eps = total / static_cast<double>(n);
  if (eps == 0.0 && warning) *warning = "avg_nn_distance: all real samples are duplicates; epsilon is 0";
  return eps;
}

NeighborHistogram neighbor_counts(const Matrix& real, const Matrix& generated, double radius) {
  require(radius > 0.0, "neighbor_counts: radius must be positive");
  require(generated.rows() == 0 || generated.cols() == real.cols(), "neighbor_counts: dimension mismatch");
  NeighborHistogram h;
  h.radius = radius;
  h.base_radius = radius;
  h.counts.assign(static_cast<std::size_t>(real.rows()), 0);
  const double r2 = radius * radius;
  int max_k = 0;
  for (Eigen::Index i = 0; i < real.rows(); ++i) {
    int k = 0;
    for (Eigen::Index j = 0; j < generated.rows(); ++j)
      if ((generated.row(j) - real.row(i)).squaredNorm() <= r2) ++k;
    h.counts[i] = k;
    max_k = std::max(max_k, k);
  }
  h.histogram.assign(static_cast<std::size_t>(max_k) + 1, 0);
  for (int k : h.counts) ++h.histogram[k];
  if (real.rows() == 0) h.histogram.clear();
  return h;
}

NeighborHistogram neighbor_counts(const Matrix& real, const Matrix& generated, double base_radius,
                                  double multiplier) {
  auto h = neighbor_counts(real, generated, base_radius * multiplier);
  h.base_radius = base_radius;
  h.multiplier = multiplier;
  return h;
}

UniformityStats uniformity_stats(const NeighborHistogram& hist) {
  require(!hist.counts.empty(), "uniformity_stats: empty histogram");
  UniformityStats s;
  const auto n = static_cast<double>(hist.counts.size());
  for (int k : hist.counts) s.mean += k;
  s.mean /= n;
  for (int k : hist.counts) s.variance += (k - s.mean) * (k - s.mean);
  s.variance /= n;
  s.cv = s.mean > 0.0 ? std::sqrt(s.variance) / s.mean : 0.0;
  return s;
}

double total_variation(const Vector& p, const Vector& q) {
  require(p.size() == q.size(), "total_variation: size mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

std::vector<int> assign_modes(const Matrix& samples, const Matrix& centers) {
  require(centers.rows() >= 1, "assign_modes: need at least one mode centre");
  require(samples.rows() == 0 || samples.cols() == centers.cols(), "assign_modes: dimension mismatch");
  std::vector<int> modes(static_cast<std::size_t>(samples.rows()), 0);
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      double d = (centers.row(c) - samples.row(i)).squaredNorm();
      if (d < best) {
        best = d;
        modes[i] = static_cast<int>(c);
      }
    }
  }
  return modes;
}

BiasReport mode_proportions(const Matrix& generated, const Matrix& centers, const Vector& training_proportions) {
  require(generated.rows() > 0, "mode_proportions: no generated samples");
  require(training_proportions.size() == centers.rows(), "mode_proportions: one training proportion per mode");
  const Eigen::Index k = centers.rows();
  BiasReport r;
  r.generated = Vector::Zero(k);
  for (int m : assign_modes(generated, centers)) r.generated(m) += 1.0;
  r.generated /= static_cast<double>(generated.rows());
  r.training = training_proportions;
  r.uniform = Vector::Constant(k, 1.0 / static_cast<double>(k));
  r.tv_uniform = total_variation(r.generated, r.uniform);
  r.tv_training = total_variation(r.generated, r.training);
  return r;
}

double wasserstein2_1d(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "wasserstein2_1d: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
  }
  // Walk the merged quantile breakpoints i/na and j/nb.
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double u = 0.0, s = 0.0;
  while (i < a.size() && j < b.size()) {
    double next_a = static_cast<double>(i + 1) / na;
    double next_b = static_cast<double>(j + 1) / nb;
    double next = std::min(next_a, next_b);
    s += (next - u) * (a[i] - b[j]) * (a[i] - b[j]);
    u = next;
    if (next_a <= next) ++i;
    if (next_b <= next) ++j;
  }
  return std::sqrt(s);
}

double sliced_wasserstein(const Matrix& a, const Matrix& b, int n_projections, std::uint64_t seed) {
  require(a.rows() > 0 && b.rows() > 0, "sliced_wasserstein: empty sample");
  if (a.cols() != b.cols()) throw ContractError("sliced_wasserstein: dimension mismatch");
  require(n_projections > 0, "sliced_wasserstein: need at least one projection");
  Pcg32 rng = derive_rng(seed, 61);
  double total = 0.0;
  std::vector<double> pa(static_cast<std::size_t>(a.rows())), pb(static_cast<std::size_t>(b.rows()));
  for (int p = 0; p < n_projections; ++p) {
    Vector dir(a.cols());
    do {
      for (Eigen::Index k = 0; k < dir.size(); ++k) dir(k) = rng.normal();
    } while (dir.norm() == 0.0);
    dir.normalize();
    Vector qa = a * dir;
    Vector qb = b * dir;
    std::copy(qa.data(), qa.data() + qa.size(), pa.begin());
    std::copy(qb.data(), qb.data() + qb.size(), pb.begin());
    total += wasserstein2_1d(pa, pb);
  }
  return total / n_projections;
}

namespace {

double mean_cross_distance(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) s += (a.row(i) - b.row(j)).norm();
  return s / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

}  // namespace

double energy_distance(const Matrix& a, const Matrix& b) {
  require(a.rows() > 0 && b.rows() > 0, "energy_distance: empty sample");
  if (a.cols() != b.cols()) throw ContractError("energy_distance: dimension mismatch");
  double v = 2.0 * mean_cross_distance(a, b) - mean_cross_distance(a, a) - mean_cross_distance(b, b);
  return std::max(0.0, v);
}

DistanceReport distance_report(const Matrix& a, const Matrix& b, int n_projections, std::uint64_t seed) {
  return {sliced_wasserstein(a, b, n_projections, seed), energy_distance(a, b), n_projections, seed};
}

}  // namespace mgs::eval
