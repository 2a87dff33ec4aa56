#include "mgs/io/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "mgs/rng.hpp"

namespace mgs::io {

void Dataset::validate() const {
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != samples.rows())
    throw ContractError("dataset: label count must equal sample count");
  if (mode_weights) {
    if (std::abs(mode_weights->sum() - 1.0) > 1e-9) throw ConfigError("dataset: mode weights must sum to 1");
    if (mode_centers && mode_centers->rows() != mode_weights->size())
      throw ContractError("dataset: one weight per mode centre");
  }
  if (!samples.allFinite()) throw NumericError("dataset: non-finite sample values");
}

DataKind data_kind_from_string(std::string_view s) {
  if (s == "gmm-ring") return DataKind::gmm_ring;
  if (s == "gmm-skewed") return DataKind::gmm_skewed;
  if (s == "two-moons") return DataKind::two_moons;
  if (s == "subspaces") return DataKind::subspaces;
  throw ConfigError("unknown data kind '" + std::string(s) + "' (expected gmm-ring|gmm-skewed|two-moons|subspaces)");
}

std::string_view to_string(DataKind k) {
  switch (k) {
    case DataKind::gmm_ring: return "gmm-ring";
    case DataKind::gmm_skewed: return "gmm-skewed";
    case DataKind::two_moons: return "two-moons";
    case DataKind::subspaces: return "subspaces";
  }
  return "?";
}

namespace {

// Exact per-mode counts by largest remainder, so proportions match the weights.
std::vector<Eigen::Index> allocate(const Vector& weights, Eigen::Index n) {
  const auto k = static_cast<std::size_t>(weights.size());
  std::vector<Eigen::Index> counts(k);
  std::vector<double> rem(k);
  Eigen::Index used = 0;
  for (std::size_t c = 0; c < k; ++c) {
    double exact = weights(static_cast<Eigen::Index>(c)) * static_cast<double>(n);
    counts[c] = static_cast<Eigen::Index>(std::floor(exact));
    rem[c] = exact - static_cast<double>(counts[c]);
    used += counts[c];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t i = 0; used < n; ++i, ++used) ++counts[order[i % k]];
  return counts;
}

Vector resolve_weights(const DataParams& p, int k) {
  if (p.weights.empty()) return Vector::Constant(k, 1.0 / k);
  if (static_cast<int>(p.weights.size()) != k)
    throw ConfigError("data: expected " + std::to_string(k) + " weights, got " + std::to_string(p.weights.size()));
  Vector w(k);
  for (int i = 0; i < k; ++i) {
    if (!(p.weights[i] >= 0.0)) throw ConfigError("data: weights must be non-negative");
    w(i) = p.weights[i];
  }
  if (std::abs(w.sum() - 1.0) > 1e-9) throw ConfigError("data: weights must sum to 1");
  return w;
}

void shuffle_rows(Dataset& ds, Pcg32& rng) {
  const Eigen::Index n = ds.samples.rows();
  for (Eigen::Index i = n - 1; i > 0; --i) {
    auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint32_t>(i + 1)));
    ds.samples.row(i).swap(ds.samples.row(j));
    std::swap(ds.labels[i], ds.labels[j]);
  }
}

}  // namespace

Dataset make_data(DataKind kind, const DataParams& params, std::uint64_t seed) {
  if (params.samples < 1) throw ConfigError("data: sample count must be positive");
  Pcg32 rng = derive_rng(seed, 71);
  Dataset ds;
  ds.name = std::string(to_string(kind));

  switch (kind) {
    case DataKind::gmm_ring:
    case DataKind::gmm_skewed: {
      const bool ring = kind == DataKind::gmm_ring;
      int k = params.modes > 0 ? params.modes : (ring ? 8 : 2);
      Vector w = ring || !params.weights.empty() ? resolve_weights(params, k)
                                                 : (k == 2 ? Vector{{0.61, 0.39}} : resolve_weights(params, k));
      double noise = params.noise >= 0.0 ? params.noise : (ring ? 0.2 : 0.5);
      double radius = params.radius > 0.0 ? params.radius : (ring ? 3.0 : 2.0);
      Matrix centers(k, 2);
      for (int c = 0; c < k; ++c) {
        if (ring) {
          double a = 2.0 * std::numbers::pi * c / k;
          centers(c, 0) = radius * std::cos(a);
          centers(c, 1) = radius * std::sin(a);
        } else {
          // Modes evenly spread along the x axis on [-radius, radius].
          centers(c, 0) = k == 1 ? 0.0 : -radius + 2.0 * radius * c / (k - 1);
          centers(c, 1) = 0.0;
        }
      }
      auto counts = allocate(w, params.samples);
      ds.samples.resize(params.samples, 2);
      Eigen::Index row = 0;
      for (int c = 0; c < k; ++c)
        for (Eigen::Index i = 0; i < counts[c]; ++i, ++row) {
          ds.samples(row, 0) = centers(c, 0) + noise * rng.normal();
          ds.samples(row, 1) = centers(c, 1) + noise * rng.normal();
          ds.labels.push_back(c);
        }
      ds.mode_centers = centers;
      ds.mode_weights = w;
      break;
    }
    case DataKind::two_moons: {
      Vector w = resolve_weights(params, 2);
      double noise = params.noise >= 0.0 ? params.noise : 0.1;
      auto counts = allocate(w, params.samples);
      ds.samples.resize(params.samples, 2);
      Eigen::Index row = 0;
      for (int c = 0; c < 2; ++c)
        for (Eigen::Index i = 0; i < counts[c]; ++i, ++row) {
          double theta = std::numbers::pi * rng.uniform();
          double x = c == 0 ? std::cos(theta) : 1.0 - std::cos(theta);
          double y = c == 0 ? std::sin(theta) : 0.5 - std::sin(theta);
          ds.samples(row, 0) = x + noise * rng.normal();
          ds.samples(row, 1) = y + noise * rng.normal();
          ds.labels.push_back(c);
        }
      // Arc centroids: the mean of sin over [0, pi] is 2/pi.
      Matrix centers(2, 2);
      centers << 0.0, 2.0 / std::numbers::pi, 1.0, 0.5 - 2.0 / std::numbers::pi;
      ds.mode_centers = centers;
      ds.mode_weights = w;
      break;
    }
    case DataKind::subspaces: {
      int k = params.modes > 0 ? params.modes : 3;
      const Eigen::Index dim = params.ambient_dim;
      const Eigen::Index sub = params.subspace_dim;
      if (sub < 1 || k * sub > dim) throw ConfigError("data: subspaces need k * subspace_dim <= ambient dim");
      Vector w = resolve_weights(params, k);
      double noise = params.noise >= 0.0 ? params.noise : 0.0;
      Matrix gauss = rng.normal_matrix(dim, dim);
      Eigen::HouseholderQR<Matrix> qr(gauss);
      Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
      auto counts = allocate(w, params.samples);
      ds.samples.resize(params.samples, dim);
      Eigen::Index row = 0;
      for (int c = 0; c < k; ++c) {
        Matrix basis = q.middleCols(c * sub, sub);
        for (Eigen::Index i = 0; i < counts[c]; ++i, ++row) {
          Vector coef(sub);
          for (Eigen::Index j = 0; j < sub; ++j) coef(j) = rng.normal();
          ds.samples.row(row) = (basis * coef).transpose();
          for (Eigen::Index j = 0; j < dim && noise > 0.0; ++j) ds.samples(row, j) += noise * rng.normal();
          ds.labels.push_back(c);
        }
      }
      ds.mode_weights = w;
      break;
    }
  }
  shuffle_rows(ds, rng);
  ds.validate();
  return ds;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) {
    while (!cur.empty() && (cur.back() == '\r' || cur.back() == ' ')) cur.pop_back();
    std::size_t first = cur.find_first_not_of(' ');
    out.push_back(first == std::string::npos ? std::string() : cur.substr(first));
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw IoError(path.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const std::filesystem::path& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw IoError(path.string() + ": truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace

void write_matrix_csv(const Matrix& m, const std::vector<std::string>& header, const std::filesystem::path& path) {
  require(static_cast<Eigen::Index>(header.size()) == m.cols(), "write_matrix_csv: one header per column");
  auto out = open_out(path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Matrix read_matrix_csv(const std::filesystem::path& path, std::vector<std::string>* header) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  auto names = split(line, ',');
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split(line, ',');
    if (fields.size() != names.size())
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(names.size()) +
                    " fields, got " + std::to_string(fields.size()));
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_double(f, path, lineno));
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < names.size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  if (header) *header = std::move(names);
  return m;
}

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < ds.dim(); ++j) header.push_back("x" + std::to_string(j));
  Matrix m = ds.samples;
  if (!ds.labels.empty()) {
    header.emplace_back("label");
    m.conservativeResize(Eigen::NoChange, ds.dim() + 1);
    for (Eigen::Index i = 0; i < ds.size(); ++i) m(i, ds.dim()) = ds.labels[i];
  }
  write_matrix_csv(m, header, path);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::vector<std::string> header;
  Matrix m = read_matrix_csv(path, &header);
  Dataset ds;
  ds.name = path.stem().string();
  bool labelled = !header.empty() && header.back() == "label";
  Eigen::Index dim = m.cols() - (labelled ? 1 : 0);
  for (Eigen::Index j = 0; j < dim; ++j)
    if (header[j] != "x" + std::to_string(j))
      throw IoError(path.string() + ": expected column 'x" + std::to_string(j) + "', found '" + header[j] + "'");
  if (dim < 1) throw IoError(path.string() + ": no data columns");
  ds.samples = m.leftCols(dim);
  if (labelled)
    for (Eigen::Index i = 0; i < m.rows(); ++i) ds.labels.push_back(static_cast<int>(std::lround(m(i, dim))));
  ds.validate();
  return ds;
}

void write_dataset_binary(const Dataset& ds, const std::filesystem::path& path) {
  auto out = open_out(path, true);
  out.write("MGSD", 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.dim()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(ds.size()));
  for (Eigen::Index i = 0; i < ds.size(); ++i)
    for (Eigen::Index j = 0; j < ds.dim(); ++j) put_le<double>(out, ds.samples(i, j));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Dataset read_dataset_binary(const std::filesystem::path& path) {
  auto in = open_in(path, true);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "MGSD", 4) != 0) throw IoError(path.string() + ": bad magic (expected MGSD)");
  auto dim = get_le<std::uint32_t>(in, path);
  auto n = get_le<std::uint64_t>(in, path);
  if (dim == 0) throw IoError(path.string() + ": zero dimension");
  Dataset ds;
  ds.name = path.stem().string();
  ds.samples.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < dim; ++j) ds.samples(static_cast<Eigen::Index>(i), j) = get_le<double>(in, path);
  ds.validate();
  return ds;
}

}  // namespace mgs::io
