#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mgs/common.hpp"

namespace mgs::io {

struct Dataset {
  std::string name;
  Matrix samples;                     // n x D
  std::vector<int> labels;            // empty or one per sample
  std::optional<Matrix> mode_centers; // k x D
  std::optional<Vector> mode_weights; // k, sums to 1

  Eigen::Index dim() const { return samples.cols(); }
  Eigen::Index size() const { return samples.rows(); }
  void validate() const;
};

enum class DataKind { gmm_ring, gmm_skewed, two_moons, subspaces };

DataKind data_kind_from_string(std::string_view s);
std::string_view to_string(DataKind k);

struct DataParams {
  Eigen::Index samples = 4000;
  int modes = 0;                 // 0: kind default (ring 8, skewed 2, moons 2, subspaces 3)
  std::vector<double> weights;   // empty: kind default
  double noise = -1.0;           // < 0: kind default
  double radius = -1.0;          // <= 0: kind default (ring 3, skewed 2)
  Eigen::Index ambient_dim = 20; // subspaces only
  Eigen::Index subspace_dim = 2; // subspaces only
};

/// Synthetic benchmark data, deterministic given `seed`.
///  gmm-ring:   k isotropic Gaussians on a circle of the given radius (uniform weights).
///  gmm-skewed: 2 Gaussians at (+-radius, 0), weights 0.61 / 0.39 by default.
///  two-moons:  the classic interleaved half circles plus Gaussian noise.
///  subspaces:  k mutually orthogonal planted subspaces of R^D, Gaussian coefficients,
///              n/k samples per subspace (the remainder goes to the first ones).
Dataset make_data(DataKind kind, const DataParams& params, std::uint64_t seed);

/// CSV with header `x0,...,x{D-1}[,label]`.
void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Raw binary: "MGSD", u32 D, u64 n, then n*D little-endian f64 row-major.
void write_dataset_binary(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset_binary(const std::filesystem::path& path);

/// Plain numeric CSV with a header row of column names.
void write_matrix_csv(const Matrix& m, const std::vector<std::string>& header, const std::filesystem::path& path);
Matrix read_matrix_csv(const std::filesystem::path& path, std::vector<std::string>* header = nullptr);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace mgs::io
