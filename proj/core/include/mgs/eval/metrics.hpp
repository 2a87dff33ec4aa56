#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgs/common.hpp"

namespace mgs::eval {

/// Radius multipliers used for the epsilon-ball study.
inline constexpr double kRadiusMultipliers[] = {0.8, 1.0, 1.2};

/// Mean Euclidean distance from each real sample to its nearest other real
/// sample. Writes a warning when the result is 0 (duplicate-only data).
double avg_nn_distance(const Matrix& real, std::string* warning = nullptr);

struct NeighborHistogram {
  double multiplier = 1.0;
  double base_radius = 0.0;
  double radius = 0.0;
  std::vector<int> counts;     // k_i per real sample
  std::vector<int> histogram;  // histogram[k] = #{i : k_i = k}, bin width 1
};

/// k_i = #{g : ||g - r_i|| <= radius}. Plain O(n m) scan.
NeighborHistogram neighbor_counts(const Matrix& real, const Matrix& generated, double radius);

/// neighbor_counts at radius multiplier * base_radius, recording both.
NeighborHistogram neighbor_counts(const Matrix& real, const Matrix& generated, double base_radius,
                                  double multiplier);

struct UniformityStats {
  double mean = 0.0;
  double variance = 0.0;  // population variance of k_i
  double cv = 0.0;        // stddev / mean, 0 when mean is 0
};

UniformityStats uniformity_stats(const NeighborHistogram& hist);

/// 1/2 sum |p_i - q_i|.
double total_variation(const Vector& p, const Vector& q);

struct BiasReport {
  Vector generated;
  Vector training;
  Vector uniform;
  double tv_uniform = 0.0;
  double tv_training = 0.0;
};

/// Nearest-centre mode assignment of generated samples (ties go to the lower
/// index), then proportions and TV distances.
std::vector<int> assign_modes(const Matrix& samples, const Matrix& centers);
BiasReport mode_proportions(const Matrix& generated, const Matrix& centers, const Vector& training_proportions);

/// Mean over random unit directions of the 1-D 2-Wasserstein distance between
/// the projected empirical distributions (exact quantile coupling, so the two
/// sets may differ in size).
double sliced_wasserstein(const Matrix& a, const Matrix& b, int n_projections, std::uint64_t seed);

/// V-statistic energy distance 2E|a-b| - E|a-a'| - E|b-b'|, clamped at 0.
double energy_distance(const Matrix& a, const Matrix& b);

struct DistanceReport {
  double sliced_wasserstein = 0.0;
  double energy = 0.0;
  int projections = 0;
  std::uint64_t seed = 0;
};

DistanceReport distance_report(const Matrix& a, const Matrix& b, int n_projections, std::uint64_t seed);

/// 1-D 2-Wasserstein distance between two empirical samples.
double wasserstein2_1d(std::vector<double> a, std::vector<double> b);

}  // namespace mgs::eval
