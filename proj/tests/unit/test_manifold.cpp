#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "mgs/io/dataset.hpp"
#include "mgs/manifold/diagnostics.hpp"
#include "mgs/manifold/model.hpp"
#include "mgs/manifold/objective.hpp"
#include "mgs/manifold/prior_encoder.hpp"
#include "mgs/manifold/relations.hpp"
#include "mgs/nn/gradcheck.hpp"
#include "oracles.hpp"

using namespace mgs;
using namespace mgs::manifold;

namespace {

Vector flat(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unflat(const Vector& v, Eigen::Index r, Eigen::Index c) { return Eigen::Map<const Matrix>(v.data(), r, c); }

double direct_half_logdet(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  return 0.5 * eig.eigenvalues().array().log().sum();
}

}  // namespace

TEST_CASE("relation matrix invariants") {
  Matrix ok = Matrix::Identity(3, 3);
  ok(0, 1) = ok(1, 0) = 0.4;
  CHECK(RelationMatrix(ok).size() == 3);
  Matrix asym = ok;
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(RelationMatrix{asym}, ContractError);
  Matrix diag = ok;
  diag(2, 2) = 0.9;
  CHECK_THROWS_AS(RelationMatrix{diag}, ContractError);
  Matrix range = ok;
  range(0, 2) = range(2, 0) = 1.5;
  CHECK_THROWS_AS(RelationMatrix{range}, ContractError);
  CHECK_THROWS_AS(RelationMatrix{Matrix::Identity(2, 3)}, ContractError);
}

TEST_CASE("prior kernel relations") {
  Matrix z(3, 2);
  z << 0, 0, 0, 0, 1, 1;
  auto r = prior_relations(z, 2.0);
  CHECK(r(0, 1) == 1.0);
  CHECK(r(0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(r(0, 2) == doctest::Approx(0.36788).epsilon(1e-5));
  CHECK_THROWS_AS(prior_relations(z, 0.0), ContractError);

  Matrix p(4, 2);
  p << 0, 0, 1, 0, 0, 3, 2, 2;
  std::vector<double> d;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      double s = 0;
      for (int c = 0; c < 2; ++c) s += (p(i, c) - p(j, c)) * (p(i, c) - p(j, c));
      d.push_back(s);
    }
  std::sort(d.begin(), d.end());
  double med = 0.5 * (d[2] + d[3]);
  CHECK(std::abs(median_sq_distance(p) - med) < 1e-12);
  auto rp = prior_relations(p, med);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(rp(i, j) - std::exp(-(p.row(i) - p.row(j)).squaredNorm() / med)) < 1e-12);
  CHECK(median_sq_distance(Matrix::Zero(1, 2)) == 1.0);
  CHECK(median_sq_distance(Matrix::Ones(5, 2)) == 1.0);
}

TEST_CASE("kmeans") {
  Pcg32 rng(21);
  Matrix pts(10, 2);
  for (int i = 0; i < 10; ++i) {
    pts(i, 0) = (i < 5 ? -10.0 : 10.0) + 0.1 * rng.normal();
    pts(i, 1) = 0.1 * rng.normal();
  }
  auto r = kmeans_relations(pts, 2, 3);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) CHECK(r(i, j) == ((i < 5) == (j < 5) ? 1.0 : 0.0));

  auto each = kmeans_relations(pts, 10, 3);
  CHECK(each.values() == Matrix::Identity(10, 10));
  CHECK_THROWS_AS(kmeans(pts, 11, 0), ContractError);

  // Duplicate points: clusters stay non-empty and labels stay in range.
  Matrix dup = Matrix::Zero(6, 2);
  dup(5, 0) = 1.0;
  auto km = kmeans(dup, 3, 1);
  for (int l : km.labels) CHECK((l >= 0 && l < 3));
  CHECK(kmeans(pts, 2, 9).labels == kmeans(pts, 2, 9).labels);
}

TEST_CASE("lm objective closed forms") {
  LmConfig lcfg{ObjectiveForm::logdet, 0.5};
  Matrix z = Matrix::Identity(2, 2);
  auto c = Memberships::from_labels({0, 1}, 2);
  double expect = std::log(3.0) - 0.5 * std::log(5.0);
  // Direct evaluation of the two diagonal determinants.
  Matrix whole = Matrix::Identity(2, 2) + 2.0 * z.transpose() * z;
  Matrix part = Matrix::Identity(2, 2) + 4.0 * z.row(0).transpose() * z.row(0);
  CHECK(direct_half_logdet(whole) - 0.5 * 2 * 0.5 * std::log(part.determinant()) == doctest::Approx(expect));
  CHECK(lm_objective(z, c, lcfg).value == doctest::Approx(expect).epsilon(1e-14));
  CHECK(expect == doctest::Approx(0.29389).epsilon(1e-5));

  Pcg32 rng(22);
  Matrix f = rng.normal_matrix(9, 4);
  std::vector<int> labels{0, 1, 2, 0, 1, 2, 0, 0, 1};
  auto hard = Memberships::from_labels(labels, 3);
  CHECK(std::abs(lm_objective(f, hard, {ObjectiveForm::trace, 0.5}).value) < 1e-13);

  // One group per sample from a block relation matrix equals the per-class form.
  auto per_sample = Memberships::from_relations(relations_from_labels(labels).values());
  CHECK(per_sample.groups() == 9);
  CHECK(lm_objective(f, per_sample, lcfg).value == doctest::Approx(lm_objective(f, hard, lcfg).value).epsilon(1e-12));

  // Brute-force logdet form.
  double n = 9, d = 4;
  double v = direct_half_logdet(Matrix::Identity(4, 4) + d / (n * 0.5) * f.transpose() * f);
  for (int j = 0; j < 3; ++j) {
    Matrix cj = Matrix::Zero(9, 9);
    double nj = 0;
    for (int i = 0; i < 9; ++i)
      if (labels[i] == j) cj(i, i) = 1, ++nj;
    v -= nj / n * direct_half_logdet(Matrix::Identity(4, 4) + d / (nj * 0.5) * f.transpose() * cj * f);
  }
  CHECK(lm_objective(f, hard, lcfg).value == doctest::Approx(v).epsilon(1e-12));

  CHECK_THROWS_AS(lm_objective(f, Memberships::from_labels({0, 1}, 2), lcfg), ContractError);
  Matrix bad = f;
  bad(0, 0) = NAN;
  CHECK_THROWS_AS(lm_objective(bad, hard, lcfg), NumericError);
  CHECK(objective_form_from_string("trace") == ObjectiveForm::trace);
  CHECK_THROWS_AS(objective_form_from_string("nuclear"), ConfigError);
}

TEST_CASE("lm objective gradients match finite differences") {
  Pcg32 rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::Index n = 3 + rep % 6, d = 2 + rep % 5;
    Matrix z = rng.normal_matrix(n, d);
    Matrix r = Matrix::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) r(i, j) = r(j, i) = rng.uniform();
    for (auto form : {ObjectiveForm::logdet, ObjectiveForm::trace}) {
      LmConfig cfg{form, 0.3 + rng.uniform()};
      auto c = Memberships::from_relations(r);
      auto v = lm_objective(z, c, cfg);
      auto report = nn::finite_diff_check([&](const Vector& q) { return lm_objective(unflat(q, n, d), c, cfg).value; },
                                          flat(z), flat(v.grad));
      CHECK(report.max_relative_error < 1e-6);
    }
  }
}

TEST_CASE("compactness measures") {
  auto zero = compactness(Matrix::Zero(3, 5));
  CHECK(zero.trace_measure == 0.0);
  CHECK(zero.rate_measure == 0.0);
  Pcg32 rng(24);
  Matrix m = rng.normal_matrix(3, 8);
  auto a = compactness(m), b = compactness(2.5 * m);
  CHECK(b.trace_measure == doctest::Approx(6.25 * a.trace_measure).epsilon(1e-13));
  CHECK(a.trace_measure == doctest::Approx(m.squaredNorm() / 16.0).epsilon(1e-13));
  CHECK(a.rate_measure == doctest::Approx(direct_half_logdet(Matrix::Identity(3, 3) + m * m.transpose() / 8.0)).epsilon(1e-12));
  // First-order agreement for small M.
  auto s = compactness(0.01 * m);
  CHECK(std::abs(s.trace_measure - s.rate_measure) / s.rate_measure < 1e-3);
}

TEST_CASE("prior encoder") {
  Pcg32 rng(25);
  Matrix data = Matrix::Zero(50, 5);
  data.col(1) = rng.normal_matrix(50, 1) * 2.0;
  data.col(3) = rng.normal_matrix(50, 1);
  auto enc = fit_prior_encoder(data, 2);
  Matrix codes = encode(enc, data);
  Matrix recon = (codes * enc.basis.transpose()).rowwise() + enc.mean.transpose();
  CHECK((recon - data).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(enc.warnings.empty());

  auto degenerate = fit_prior_encoder(data, 4);
  CHECK(degenerate.dim() == 2);
  CHECK(degenerate.warnings.size() == 1);

  Matrix full = rng.normal_matrix(80, 4) * Matrix::Random(4, 4);
  auto e = fit_prior_encoder(full, 4);
  Matrix centred = full.rowwise() - full.colwise().mean();
  Eigen::JacobiSVD<Matrix> svd(centred);
  Vector sv = svd.singularValues().array().square() / 79.0;
  for (int i = 0; i < 4; ++i) CHECK(e.variances(i) == doctest::Approx(sv(i)).epsilon(1e-10));
  CHECK((e.basis.transpose() * e.basis - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(fit_prior_encoder(full, 5), ContractError);
}

TEST_CASE("subspace diagnostics on constructed features") {
  Matrix z = Matrix::Zero(6, 4);
  z(0, 0) = 1;
  z(1, 1) = 1;
  z(2, 0) = z(2, 1) = std::sqrt(0.5);
  z(3, 2) = 1;
  z(4, 3) = 1;
  z(5, 2) = 1;
  auto r = subspace_diagnostics(z, {0, 0, 0, 1, 1, 1});
  CHECK(r.max_coherence < 1e-15);
  REQUIRE(r.modes.size() == 2);
  CHECK(r.modes[0].rank == 2);

  Matrix dup(4, 2);
  dup << 1, 0, 0, 1, 1, 0, 0, 1;
  CHECK(subspace_diagnostics(dup, {0, 0, 1, 1}).max_coherence == doctest::Approx(1.0).epsilon(1e-12));

  auto lone = subspace_diagnostics(z, {0, 0, 0, 1, 1, 2});
  CHECK(lone.modes.size() == 2);
  CHECK(lone.warnings.size() == 1);
}

TEST_CASE("embedder and relation net gradients") {
  Pcg32 rng(26);
  for (bool normalize : {true, false}) {
    auto h = test::random_manifold(3, 4, 3, rng, normalize, 0.7);
    Matrix x = rng.normal_matrix(5, 3);
    Matrix target = h.relations(rng.normal_matrix(5, 3));
    auto mm = h.relation_mismatch(x, target);
    auto rep = nn::finite_diff_check(
        [&](const Vector& q) { return (target - h.relations(unflat(q, 5, 3))).squaredNorm(); }, flat(x),
        flat(mm.input_grad));
    CHECK(rep.max_relative_error < 1e-6);
    Matrix r = h.relations(x);
    CHECK((r - r.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((r.diagonal().array() == 1.0).all());
    if (normalize) {
      Matrix f = h.embedder.embed(x);
      for (Eigen::Index i = 0; i < f.rows(); ++i) CHECK(f.row(i).norm() == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("relation loss gradients") {
  Pcg32 rng(27);
  for (int rep = 0; rep < 5; ++rep) {
    auto h = test::random_manifold(3, 4, 3, rng);
    Matrix z = rng.normal_matrix(6, 4);
    RelationMatrix prior = prior_relations(rng.normal_matrix(6, 2), 1.0);
    auto rl = relation_loss(h.relation, z, prior);
    auto rp = nn::finite_diff_check(
        [&](const Vector& p) {
          RelationNetG g = h.relation;
          g.phi.set_parameters(p);
          return relation_loss(g, z, prior).loss;
        },
        h.relation.phi.parameters(), rl.grads.flatten());
    CHECK(rp.max_relative_error < 1e-6);
    auto rz = nn::finite_diff_check(
        [&](const Vector& q) { return relation_loss(h.relation, unflat(q, 6, 4), prior).loss; }, flat(z),
        flat(rl.feature_grad));
    CHECK(rz.max_relative_error < 1e-6);
    RelationMatrix own(h.relation.relations(z));
    CHECK(relation_loss(h.relation, z, own).loss == 0.0);
  }
}

TEST_CASE("manifold training on planted subspaces") {
  io::DataParams dp;
  dp.samples = 150;
  dp.modes = 3;
  dp.ambient_dim = 10;
  dp.subspace_dim = 2;
  auto ds = io::make_data(io::DataKind::subspaces, dp, 5);
  ManifoldTrainConfig cfg;
  cfg.embed_hidden = {16};
  cfg.relation_hidden = {16};
  cfg.feature_dim = 6;
  cfg.relation_steps = 40;
  cfg.embed_steps = 60;
  cfg.joint_steps = 10;
  cfg.batch_size = 200;  // full batch: stage 2 is plain ascent
  cfg.seed = 8;
  auto a = train_manifold(ds.samples, cfg);
  auto b = train_manifold(ds.samples, cfg);
  CHECK(a.model.embedder.net.parameters() == b.model.embedder.net.parameters());
  CHECK(a.model.relation.phi.parameters() == b.model.relation.phi.parameters());
  REQUIRE(a.log.embed_stage.size() == 60);
  int up = 0;
  for (std::size_t i = 1; i < a.log.embed_stage.size(); ++i) up += a.log.embed_stage[i] >= a.log.embed_stage[i - 1];
  CHECK(up >= 0.95 * 59);
  CHECK(a.log.relation_stage.back() < a.log.relation_stage.front());

  cfg.relation_source = RelationSource::kmeans;
  cfg.kmeans_k = 3;
  auto k = train_manifold(ds.samples, cfg);
  CHECK(std::isfinite(k.log.joint_objective.back()));
}

TEST_CASE("supervised embedder ascends the objective") {
  io::DataParams dp;
  dp.samples = 60;
  dp.modes = 3;
  dp.ambient_dim = 8;
  auto ds = io::make_data(io::DataKind::subspaces, dp, 6);
  Pcg32 rng(28);
  EmbedderF f{test::random_net({8, 12, 6}, nn::Activation::tanh, rng), true};
  auto c = Memberships::from_labels(ds.labels, 3);
  auto values = train_embedder_supervised(f, ds.samples, c, {ObjectiveForm::logdet, 0.5}, 50, 0.05);
  CHECK(values.back() > values.front());
}
