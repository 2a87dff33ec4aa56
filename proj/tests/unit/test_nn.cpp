#include <cmath>
#include <set>

#include "doctest.h"
#include "mgs/nn/gradcheck.hpp"
#include "mgs/nn/network.hpp"
#include "mgs/nn/optim.hpp"
#include "mgs/nn/time_embed.hpp"
#include "mgs/rng.hpp"
#include "oracles.hpp"

using namespace mgs;
using nn::Activation;

namespace {

nn::FeedforwardNet single(Matrix w, Vector b, Activation a) {
  nn::DenseLayer l;
  l.weights = std::move(w);
  l.bias = std::move(b);
  l.activation = a;
  return nn::FeedforwardNet({l});
}

// 0.5 * sum(net(x)^2) as a function of the flat parameters.
double half_sq_out(nn::FeedforwardNet net, const Matrix& x, const Vector& p) {
  net.set_parameters(p);
  return 0.5 * net.forward(x).squaredNorm();
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  Pcg32 a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    auto va = a.next_u32();
    CHECK(va == b.next_u32());
  }
  Pcg32 d(42);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += d.next_u32() == c.next_u32();
  CHECK(same < 3);
  auto s1 = derive_rng(7, 1), s2 = derive_rng(7, 2);
  CHECK(s1.next_u64() != s2.next_u64());

  Pcg32 u(5);
  double m = 0.0, v = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double z = u.normal();
    m += z;
    v += z * z;
  }
  m /= n;
  v = v / n - m * m;
  CHECK(std::abs(m) < 0.01);
  CHECK(std::abs(v - 1.0) < 0.02);
  for (int i = 0; i < 1000; ++i) CHECK(u.below(7) < 7u);
}

TEST_CASE("forward of trivial networks") {
  auto id = single(Matrix::Identity(2, 2), Vector::Zero(2), Activation::identity);
  Matrix x(1, 2);
  x << 1, 2;
  CHECK(id.forward(x) == x);

  auto zero = single(Matrix::Zero(3, 2), Vector::Zero(3), Activation::tanh);
  Pcg32 rng(1);
  CHECK(zero.forward(rng.normal_matrix(5, 2)).isZero(0.0));
}

TEST_CASE("forward matches straight-line evaluation") {
  Pcg32 rng(3);
  for (auto a : {Activation::tanh, Activation::relu, Activation::sigmoid}) {
    auto net = test::random_net({4, 7, 5, 3}, a, rng);
    Matrix x = rng.normal_matrix(9, 4);
    CHECK((net.forward(x) - test::naive_forward(net, x)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(net.forward_cached(x).outputs == net.forward(x));
  }
}

TEST_CASE("forward and backward reject bad shapes and stale caches") {
  Pcg32 rng(4);
  auto net = test::random_net({3, 4, 2}, Activation::tanh, rng);
  CHECK_THROWS_AS(net.forward(Matrix::Zero(2, 4)), ContractError);
  auto cache = net.forward_cached(rng.normal_matrix(2, 3));
  CHECK_THROWS_AS(net.backward(cache, Matrix::Zero(2, 3)), ContractError);
  net.set_parameters(net.parameters());
  CHECK_THROWS_AS(net.backward(cache, Matrix::Zero(2, 2)), ContractError);
}

TEST_CASE("backward of identity and zero upstream") {
  auto id = single(Matrix::Identity(3, 3), Vector::Zero(3), Activation::identity);
  Pcg32 rng(5);
  Matrix x = rng.normal_matrix(4, 3);
  Matrix g = rng.normal_matrix(4, 3);
  auto r = id.backward(id.forward_cached(x), g);
  CHECK((r.input_grad - g).cwiseAbs().maxCoeff() < 1e-15);

  auto net = test::random_net({3, 5, 2}, Activation::tanh, rng);
  auto z = net.backward(net.forward_cached(x), Matrix::Zero(4, 2));
  CHECK(z.input_grad.isZero(0.0));
  CHECK(z.params.flatten().isZero(0.0));
}

TEST_CASE("backward matches finite differences") {
  Pcg32 rng(6);
  for (auto a : {Activation::tanh, Activation::sigmoid, Activation::identity}) {
    auto net = test::random_net({3, 6, 4, 2}, a, rng);
    Matrix x = rng.normal_matrix(5, 3);
    auto cache = net.forward_cached(x);
    auto r = net.backward(cache, cache.outputs);
    Vector p = net.parameters();
    auto rep = nn::finite_diff_check([&](const Vector& q) { return half_sq_out(net, x, q); }, p, r.params.flatten());
    CHECK(rep.max_relative_error < 1e-6);

    Vector xf = Eigen::Map<const Vector>(x.data(), x.size());
    Matrix ig = r.input_grad;
    Vector igf = Eigen::Map<const Vector>(ig.data(), ig.size());
    auto rep2 = nn::finite_diff_check(
        [&](const Vector& q) { return 0.5 * net.forward(Eigen::Map<const Matrix>(q.data(), 5, 3)).squaredNorm(); }, xf,
        igf);
    CHECK(rep2.max_relative_error < 1e-6);
  }
}

TEST_CASE("parameters flatten and restore") {
  Pcg32 rng(7);
  auto net = test::random_net({2, 3, 1}, Activation::relu, rng);
  CHECK(net.parameter_count() == 2 * 3 + 3 + 3 + 1);
  Vector p = net.parameters();
  auto before = net.tag();
  net.set_parameters(p * 2.0);
  CHECK(net.tag() != before);
  CHECK(net.parameters() == p * 2.0);
  CHECK_THROWS_AS(net.set_parameters(Vector::Zero(3)), ContractError);
}

TEST_CASE("finite difference checker") {
  Vector x(2);
  x << 3, 4;
  auto rep = nn::finite_diff_check([](const Vector& v) { return 0.5 * v.squaredNorm(); }, x, x);
  CHECK(rep.max_relative_error < 1e-8);

  Vector bad = x;
  bad(1) = 4.1;
  CHECK(nn::finite_diff_check([](const Vector& v) { return 0.5 * v.squaredNorm(); }, x, bad).argmax == 1);

  CHECK_THROWS_AS(nn::finite_diff_check([](const Vector&) { return NAN; }, x, x), NumericError);

  // relu kink at coordinate 0: excluded, not reported as a failure.
  Vector k(3);
  k << 0.0, 0.5, -0.7;
  auto relu_sum = [](const Vector& v) { return v.cwiseMax(0.0).sum(); };
  Vector g(3);
  g << 0.0, 1.0, 0.0;
  auto kinks = [](const Vector& v, double tol) {
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (std::abs(v(i)) < tol) out.push_back(i);
    return out;
  };
  auto rk = nn::finite_diff_check(relu_sum, k, g, 1e-5, 1e-9, kinks);
  REQUIRE(rk.excluded.size() == 1);
  CHECK(rk.excluded[0] == 0);
  CHECK(rk.max_relative_error < 1e-8);
}

TEST_CASE("optimizers") {
  Vector p(1), g(1);
  p << 1.0;
  g << 2.0;
  nn::sgd_step(0.1, p, g);
  CHECK(p(0) == doctest::Approx(0.8).epsilon(1e-15));

  Pcg32 rng(8);
  Vector q = rng.normal_matrix(5, 1).col(0);
  Vector q0 = q;
  auto st = nn::AdamState::make(5, 0.01);
  nn::adam_step(st, q, Vector::Zero(5));
  CHECK(q == q0);

  // First step with g = 1: m_hat = 1, v_hat = 1, so p' = p - lr / (1 + eps).
  auto st2 = nn::AdamState::make(5, 0.01);
  Vector r = q0;
  nn::adam_step(st2, r, Vector::Ones(5));
  for (int i = 0; i < 5; ++i) CHECK(r(i) == doctest::Approx(q0(i) - 0.01 / (1.0 + 1e-8)).epsilon(1e-14));

  CHECK_THROWS_AS(nn::sgd_step(0.1, p, Vector::Zero(2)), ContractError);
  CHECK_THROWS_AS(nn::adam_step(st2, r, Vector::Zero(2)), ContractError);
}

TEST_CASE("time embedding") {
  CHECK_THROWS_AS(nn::time_embed(0, 4), ContractError);
  CHECK_THROWS_AS(nn::time_embed(3, 3), ContractError);
  for (int t : {1, 17, 999}) {
    Vector e = nn::time_embed(t, 2);
    CHECK(e(0) == doctest::Approx(std::sin(t)).epsilon(1e-15));
    CHECK(e(1) == doctest::Approx(std::cos(t)).epsilon(1e-15));
  }
  std::vector<Vector> all;
  for (int t = 1; t <= 1000; ++t) {
    all.push_back(nn::time_embed(t, 16));
    CHECK(all.back().norm() <= std::sqrt(16.0) + 1e-12);
  }
  double closest = INFINITY;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) closest = std::min(closest, (all[i] - all[j]).norm());
  CHECK(closest > 1e-6);
  CHECK(nn::time_embed(5, 16) == nn::time_embed(5, 16));
}

TEST_CASE("activation names round trip") {
  for (auto a : {Activation::identity, Activation::tanh, Activation::relu, Activation::sigmoid})
    CHECK(nn::activation_from_string(nn::to_string(a)) == a);
  CHECK_THROWS_AS(nn::activation_from_string("gelu"), ContractError);
}
