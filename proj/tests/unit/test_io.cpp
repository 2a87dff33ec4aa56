#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mgs/io/checkpoint.hpp"
#include "mgs/io/config.hpp"
#include "mgs/io/dataset.hpp"
#include "mgs/io/plot.hpp"
#include "mgs/eval/metrics.hpp"
#include "oracles.hpp"

using namespace mgs;
using namespace mgs::io;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

int rank_of(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) r += s(i) > 1e-9 * s(0);
  return r;
}

}  // namespace

TEST_CASE("config parsing and hashing") {
  auto a = parse_config("seed = 3\ndata.kind = gmm-ring\nguidance.lambda = 0.5\n");
  auto b = parse_config("# comment line\n\nguidance.lambda=0.50   # trailing\n  data.kind = gmm-ring\nseed=3\n");
  a.finalize();
  b.finalize();
  CHECK(a.hash() == b.hash());
  CHECK(a.canonical() == b.canonical());
  CHECK(a.hash().size() == 16);

  auto c = parse_config("seed = 4\ndata.kind = gmm-ring\nguidance.lambda = 0.5\n");
  c.finalize();
  CHECK(c.hash() != a.hash());

  // The output root does not take part in the hash.
  auto d = parse_config("seed = 3\ndata.kind = gmm-ring\nguidance.lambda = 0.5\noutput.root = /elsewhere\n");
  d.finalize();
  CHECK(d.hash() == a.hash());

  // Every listed key except output.root appears exactly once in the canonical form.
  auto keys = config_keys();
  REQUIRE(keys.back() == "output.root");
  keys.pop_back();
  auto entries = a.entries();
  REQUIRE(entries.size() == keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) CHECK(entries[i].first == keys[i]);

  // Canonical text parses back to the same config.
  std::string text;
  for (const auto& [k, v] : entries) text += k + " = " + v + "\n";
  auto e = parse_config(text);
  e.finalize();
  CHECK(e.canonical() == a.canonical());
}

TEST_CASE("config defaults") {
  RunConfig cfg;
  cfg.finalize();
  CHECK(cfg.guidance.guidance_steps == 5);
  CHECK(cfg.sampler_kind == diffusion::SamplerKind::deterministic);
  auto anc = parse_config("sampler.kind = ancestral\nsampler.steps = 1000\n");
  anc.finalize();
  CHECK(anc.guidance.guidance_steps == 10);
  auto km = parse_config("manifold.relation_source = kmeans-20\n");
  km.finalize();
  CHECK(km.manifold.relation_source == manifold::RelationSource::kmeans);
  CHECK(km.manifold.kmeans_k == 20);
  auto h = parse_config("model.hidden = 8, 16\ndata.weights = 0.25,0.75\n");
  CHECK(h.hidden == std::vector<Eigen::Index>{8, 16});
  CHECK(h.data.weights == std::vector<double>{0.25, 0.75});
}

TEST_CASE("config errors") {
  auto line_of = [](const std::string& text) {
    try {
      parse_config(text, "cfg");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(line_of("seed = 1\nbogus.key = 3\n").find("cfg:2") == 0);
  CHECK(line_of("seed = 1\nbogus.key = 3\n").find("bogus.key") != std::string::npos);
  CHECK(line_of("no equals sign\n").find("cfg:1") == 0);
  CHECK(!line_of("train.steps = many\n").empty());
  CHECK(!line_of("model.activation = swish\n").empty());
  CHECK(!line_of("manifold.relation_source = kmeans-x\n").empty());
  CHECK(!line_of("sampler.kind = euler\n").empty());

  auto finalize_error = [](const std::string& text) {
    auto c = parse_config(text);
    CHECK_THROWS_AS(c.finalize(), ConfigError);
  };
  finalize_error("sampler.steps = 1\n");
  finalize_error("schedule.steps = 10\nsampler.steps = 20\n");
  finalize_error("sampler.steps = 10\nguidance.steps = 11\n");
  finalize_error("guidance.batch = 1\nguidance.lambda = 1\n");
  finalize_error("model.embed_dim = 7\n");
  finalize_error("schedule.beta_start = 0.1\nschedule.beta_end = 0.01\n");
  finalize_error("data.path = /nonexistent/file.csv\n");
  CHECK_THROWS_AS(load_config("/nonexistent/config.cfg"), ConfigError);
}

TEST_CASE("synthetic data") {
  DataParams p;
  p.samples = 10000;
  p.noise = 0.05;
  auto ring = make_data(DataKind::gmm_ring, p, 1);
  REQUIRE(ring.mode_centers);
  CHECK(ring.mode_centers->rows() == 8);
  auto modes = eval::assign_modes(ring.samples, *ring.mode_centers);
  std::vector<int> counts(8, 0);
  for (int m : modes) ++counts[static_cast<std::size_t>(m)];
  for (int c : counts) CHECK(std::abs(c / 10000.0 - 0.125) < 0.02 * 0.125);
  CHECK(modes == ring.labels);

  auto again = make_data(DataKind::gmm_ring, p, 1);
  CHECK(again.samples == ring.samples);
  CHECK(make_data(DataKind::gmm_ring, p, 2).samples != ring.samples);

  DataParams sk;
  sk.samples = 20000;
  auto skewed = make_data(DataKind::gmm_skewed, sk, 3);
  REQUIRE(skewed.mode_weights);
  CHECK((*skewed.mode_weights)(0) == doctest::Approx(0.61));
  double first = std::count(skewed.labels.begin(), skewed.labels.end(), 0) / 20000.0;
  CHECK(first == doctest::Approx(0.61).epsilon(0.03));

  DataParams moons;
  moons.samples = 500;
  moons.noise = 0.0;
  auto m = make_data(DataKind::two_moons, moons, 4);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    double x = m.samples(i, 0), y = m.samples(i, 1);
    if (m.labels[i] == 0) {
      CHECK(std::abs(x * x + y * y - 1.0) < 1e-12);
      CHECK(y >= -1e-12);
    } else {
      CHECK(std::abs((x - 1) * (x - 1) + (y - 0.5) * (y - 0.5) - 1.0) < 1e-12);
      CHECK(y <= 0.5 + 1e-12);
    }
  }

  DataParams sub;
  sub.samples = 300;
  sub.modes = 3;
  sub.ambient_dim = 20;
  sub.subspace_dim = 2;
  auto s = make_data(DataKind::subspaces, sub, 5);
  CHECK(s.dim() == 20);
  for (int j = 0; j < 3; ++j) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s.labels[i] == j) rows.push_back(i);
    CHECK(rows.size() == 100);
    Matrix mj(static_cast<Eigen::Index>(rows.size()), 20);
    for (std::size_t r = 0; r < rows.size(); ++r) mj.row(static_cast<Eigen::Index>(r)) = s.samples.row(rows[r]);
    CHECK(rank_of(mj) == 2);
  }

  DataParams bad;
  bad.weights = {0.5, 0.6};
  CHECK_THROWS_AS(make_data(DataKind::gmm_skewed, bad, 0), ConfigError);
  bad.weights = {0.5, 0.5, 0.0};
  CHECK_THROWS_AS(make_data(DataKind::gmm_skewed, bad, 0), ConfigError);
  CHECK_THROWS_AS(data_kind_from_string("spiral"), ConfigError);
}

TEST_CASE("dataset files round trip") {
  auto dir = test::scratch_dir("io_data");
  DataParams p;
  p.samples = 50;
  auto ds = make_data(DataKind::gmm_ring, p, 6);
  write_dataset_csv(ds, dir / "d.csv");
  auto back = read_dataset_csv(dir / "d.csv");
  CHECK(back.samples == ds.samples);
  CHECK(back.labels == ds.labels);

  write_dataset_binary(ds, dir / "d.mgsd");
  auto bin = read_dataset_binary(dir / "d.mgsd");
  CHECK(bin.samples == ds.samples);
  CHECK(std::filesystem::file_size(dir / "d.mgsd") == 4 + 4 + 8 + 50 * 2 * 8);

  std::string raw = slurp(dir / "d.mgsd");
  spit(dir / "trunc.mgsd", raw.substr(0, raw.size() - 3));
  CHECK_THROWS_AS(read_dataset_binary(dir / "trunc.mgsd"), IoError);
  spit(dir / "magic.mgsd", "XXXX" + raw.substr(4));
  CHECK_THROWS_AS(read_dataset_binary(dir / "magic.mgsd"), IoError);
  spit(dir / "bad.csv", "x0,x1\n1,2\n3,oops\n");
  CHECK_THROWS_AS(read_dataset_csv(dir / "bad.csv"), IoError);
  spit(dir / "ragged.csv", "x0,x1\n1,2\n3\n");
  CHECK_THROWS_AS(read_dataset_csv(dir / "ragged.csv"), IoError);
  CHECK_THROWS_AS(read_dataset_csv(dir / "missing.csv"), IoError);

  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  Matrix m(2, 2);
  m << 1.0 / 3.0, NAN, -2.5e-300, 7;
  write_matrix_csv(m, {"a", "b"}, dir / "m.csv");
  std::vector<std::string> header;
  Matrix r = read_matrix_csv(dir / "m.csv", &header);
  CHECK(header == std::vector<std::string>{"a", "b"});
  CHECK(r(0, 0) == m(0, 0));
  CHECK(std::isnan(r(0, 1)));
  CHECK(r(1, 0) == m(1, 0));
}

TEST_CASE("checkpoints round trip bit for bit") {
  auto dir = test::scratch_dir("io_ckpt");
  Pcg32 rng(51);
  auto eps = diffusion::EpsModel::make(2, 6, {5, 7}, nn::Activation::relu, rng);
  save_eps_model(eps, dir / "e.mgsn");
  auto e2 = load_eps_model(dir / "e.mgsn");
  CHECK(e2.embed_dim() == 6);
  CHECK(e2.net().parameters() == eps.net().parameters());
  for (std::size_t l = 0; l < eps.net().layers().size(); ++l)
    CHECK(e2.net().layers()[l].activation == eps.net().layers()[l].activation);
  Matrix x = rng.normal_matrix(3, 2);
  CHECK(e2.predict(x, 9) == eps.predict(x, 9));

  auto h = test::random_manifold(2, 4, 3, rng, true, 0.37);
  save_manifold_model(h, dir / "h.mgsn");
  auto h2 = load_manifold_model(dir / "h.mgsn");
  CHECK(h2.relation.tau == 0.37);
  CHECK(h2.embedder.normalize);
  CHECK(h2.relations(x) == h.relations(x));

  CHECK_THROWS_AS(load_manifold_model(dir / "e.mgsn"), IoError);
  CHECK_THROWS_AS(load_eps_model(dir / "h.mgsn"), IoError);
  std::string raw = slurp(dir / "e.mgsn");
  spit(dir / "short.mgsn", raw.substr(0, raw.size() / 2));
  CHECK_THROWS_AS(load_eps_model(dir / "short.mgsn"), IoError);
  std::string v2 = raw;
  v2[4] = 2;
  spit(dir / "v2.mgsn", v2);
  CHECK_THROWS_AS(load_eps_model(dir / "v2.mgsn"), IoError);
  CHECK_THROWS_AS(load_eps_model(dir / "none.mgsn"), IoError);
}

TEST_CASE("plots") {
  auto empty = paired_histogram_svg("k at c=1", {}, {});
  CHECK(empty.find("<svg") == 0);
  CHECK(empty.find("no data") != std::string::npos);
  CHECK(empty.find("</svg>") != std::string::npos);

  Table t;
  t.header = {"k", "unguided", "guided"};
  t.rows = {{0, 5, 2}, {1, 9, 12}, {2, 4, 6}, {3, 2, 0}};
  std::string svg = render_report(t, "histogram_c1.0");
  CHECK(svg.find("data-name=\"unguided\"") != std::string::npos);
  CHECK(svg.find("data-name=\"guided\"") != std::string::npos);
  CHECK(svg == render_report(t, "histogram_c1.0"));

  std::filesystem::path golden = std::filesystem::path(MGS_TEST_DATA) / "golden_histogram.svg";
  if (std::getenv("MGS_UPDATE_GOLDEN")) spit(golden, svg);
  REQUIRE(std::filesystem::exists(golden));
  CHECK(slurp(golden) == svg);

  Table p;
  p.header = {"mode", "training", "uniform", "unguided", "guided"};
  p.rows = {{0, 0.61, 0.5, 0.7, 0.55}, {1, 0.39, 0.5, 0.3, 0.45}};
  CHECK(render_report(p, "mode_proportions").find("mode 1") != std::string::npos);

  Table missing;
  missing.header = {"k", "unguided"};
  try {
    render_report(missing, "h");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("guided") != std::string::npos);
  }
  Table missing2;
  missing2.header = {"mode", "training"};
  try {
    render_report(missing2, "p");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    std::string w = e.what();
    CHECK(w.find("uniform, unguided, guided") != std::string::npos);
  }

  auto dir = test::scratch_dir("io_plot");
  write_matrix_csv(Matrix(0, 3), {"k", "unguided", "guided"}, dir / "empty.csv");
  plot_report(dir / "empty.csv", dir / "empty.svg");
  CHECK(slurp(dir / "empty.svg").find("no data") != std::string::npos);
}
