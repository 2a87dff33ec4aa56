#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mgs/eval/metrics.hpp"
#include "oracles.hpp"

using namespace mgs;
using namespace mgs::eval;

TEST_CASE("average nearest-neighbour distance") {
  Matrix two(2, 2);
  two << 0, 0, 1, 0;
  CHECK(avg_nn_distance(two) == 1.0);
  Matrix grid(5, 1);
  grid << 0, 1, 2, 3, 4;
  CHECK(avg_nn_distance(grid) == 1.0);

  Pcg32 rng(41);
  Matrix pts = rng.normal_matrix(100, 3);
  CHECK(std::abs(avg_nn_distance(pts) - test::brute_avg_nn(pts)) < 1e-12);

  std::string warning;
  CHECK(avg_nn_distance(Matrix::Ones(4, 2), &warning) == 0.0);
  CHECK(!warning.empty());
}

TEST_CASE("neighbour counts") {
  Pcg32 rng(42);
  Matrix real = rng.normal_matrix(200, 2);
  Matrix gen = rng.normal_matrix(150, 2);
  for (double r : {0.05, 0.2, 0.7}) {
    auto h = neighbor_counts(real, gen, r);
    CHECK(h.counts == test::brute_counts(real, gen, r));
    int total = 0;
    for (std::size_t k = 0; k < h.histogram.size(); ++k) {
      total += h.histogram[k];
      CHECK(h.histogram[k] == std::count(h.counts.begin(), h.counts.end(), static_cast<int>(k)));
    }
    CHECK(total == 200);
  }
  auto self = neighbor_counts(real, real, 1e-9);
  for (int k : self.counts) CHECK(k == 1);
  auto none = neighbor_counts(real, Matrix(0, 2), 1.0);
  for (int k : none.counts) CHECK(k == 0);

  auto scaled = neighbor_counts(real, gen, 0.5, 1.2);
  CHECK(scaled.radius == doctest::Approx(0.6));
  CHECK(scaled.base_radius == 0.5);
  CHECK(scaled.multiplier == 1.2);
  CHECK(scaled.counts == test::brute_counts(real, gen, 0.5 * 1.2));
}

TEST_CASE("uniformity statistics") {
  NeighborHistogram flat;
  flat.counts = {3, 3, 3, 3};
  auto a = uniformity_stats(flat);
  CHECK(a.variance == 0.0);
  CHECK(a.cv == 0.0);
  NeighborHistogram two;
  two.counts = {0, 2, 0, 2};
  auto b = uniformity_stats(two);
  CHECK(b.mean == 1.0);
  CHECK(b.variance == 1.0);
  // Heavy tail: nine ones and a fifteen.
  NeighborHistogram tail;
  tail.counts = {1, 1, 1, 1, 1, 1, 1, 1, 1, 15};
  auto c = uniformity_stats(tail);
  double mean = 24.0 / 10.0;
  double var = (9 * (1 - mean) * (1 - mean) + (15 - mean) * (15 - mean)) / 10.0;
  CHECK(c.mean == doctest::Approx(mean));
  CHECK(c.variance == doctest::Approx(var));
  CHECK(c.cv == doctest::Approx(std::sqrt(var) / mean));
  NeighborHistogram zeros;
  zeros.counts = {0, 0};
  CHECK(uniformity_stats(zeros).cv == 0.0);
}

TEST_CASE("total variation and mode proportions") {
  Vector all_one = Vector::Zero(8);
  all_one(0) = 1.0;
  Vector uniform = Vector::Constant(8, 0.125);
  CHECK(total_variation(all_one, uniform) == doctest::Approx(0.875).epsilon(1e-15));
  CHECK(total_variation(uniform, uniform) == 0.0);
  Vector p(2), q(2);
  p << 0.71, 0.29;
  q << 0.5, 0.5;
  CHECK(total_variation(p, q) == doctest::Approx(0.21).epsilon(1e-12));

  Matrix centers(2, 2);
  centers << -1, 0, 1, 0;
  Matrix gen(4, 2);
  gen << -2, 0, -0.5, 1, 0.9, 0, 0.0, 3;  // the last sample ties and goes to mode 0
  auto modes = assign_modes(gen, centers);
  CHECK(modes == std::vector<int>{0, 0, 1, 0});
  Vector train(2);
  train << 0.61, 0.39;
  auto rep = mode_proportions(gen, centers, train);
  CHECK(rep.generated(0) == 0.75);
  CHECK(rep.uniform(1) == 0.5);
  CHECK(rep.tv_uniform == doctest::Approx(0.25));
  CHECK(rep.tv_training == doctest::Approx(0.14));
}

TEST_CASE("one-dimensional Wasserstein") {
  CHECK(wasserstein2_1d({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(wasserstein2_1d({0, 1}, {2, 3}) == doctest::Approx(2.0));
  // Unequal sizes: {0} against {0, 2} couples half the mass at distance 2.
  CHECK(wasserstein2_1d({0}, {0, 2}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(wasserstein2_1d({0, 1, 2, 3}, {0, 2}) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("sliced Wasserstein and energy distance") {
  Pcg32 rng(43);
  Matrix a = rng.normal_matrix(500, 3);
  CHECK(sliced_wasserstein(a, a, 32, 1) == 0.0);
  CHECK(energy_distance(a, a) == 0.0);
  auto r = distance_report(a, a, 16, 2);
  CHECK(r.sliced_wasserstein == 0.0);
  CHECK(r.projections == 16);

  Matrix x = rng.normal_matrix(1000, 1);
  Matrix y = x.array() + 1.7;
  CHECK(sliced_wasserstein(x, y, 8, 3) == doctest::Approx(1.7).epsilon(0.01));
  CHECK(sliced_wasserstein(y, x, 8, 3) == doctest::Approx(1.7).epsilon(0.01));

  Matrix g0 = rng.normal_matrix(10000, 2), g1 = rng.normal_matrix(10000, 2);
  g1.col(0).array() += 3.0;
  double sw = sliced_wasserstein(g0, g1, 128, 4);
  CHECK(sw == doctest::Approx(test::direct_sliced_wasserstein(g0, g1, 128, 4)).epsilon(0.02));
  // Mean of |3 cos theta| over random directions is 6 / pi.
  CHECK(sw == doctest::Approx(6.0 / std::numbers::pi).epsilon(0.1));

  CHECK(energy_distance(g0.topRows(300), g1.topRows(300)) > 1.0);
  CHECK_THROWS_AS(sliced_wasserstein(a, x, 4, 1), ContractError);
  CHECK_THROWS_AS(energy_distance(a, x), ContractError);
}
