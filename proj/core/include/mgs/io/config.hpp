#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mgs/diffusion/eps_model.hpp"
#include "mgs/diffusion/sampler.hpp"
#include "mgs/guidance/guidance.hpp"
#include "mgs/io/dataset.hpp"
#include "mgs/manifold/model.hpp"
#include "mgs/nn/network.hpp"

namespace mgs::io {

/// Every tunable of a run. Parsed from a flat `key = value` file; see
/// `config_keys()` for the full list with defaults.
struct RunConfig {
  std::uint64_t seed = 0;

  // data
  DataKind data_kind = DataKind::gmm_skewed;
  std::string data_path;  // when set, training data is read from this CSV/MGSD file
  DataParams data{};

  // schedule
  int schedule_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  // noise model
  int embed_dim = 16;
  std::vector<Eigen::Index> hidden{128, 128, 128};
  nn::Activation activation = nn::Activation::relu;
  diffusion::DiffusionTrainConfig train{};

  // manifold model
  manifold::ManifoldTrainConfig manifold{};
  std::string relation_source = "learnable";  // learnable | kmeans-<k>

  // sampling and guidance
  diffusion::SamplerKind sampler_kind = diffusion::SamplerKind::deterministic;
  int sample_steps = 50;
  guidance::GuidanceConfig guidance = [] {
    guidance::GuidanceConfig g;
    g.lambda = 0.1;
    g.max_step = 0.5;
    return g;
  }();
  /// -1 selects the per-sampler default (5 deterministic, 10 ancestral).
  int guidance_steps_setting = -1;

  // evaluation
  Eigen::Index eval_samples = 2048;
  Eigen::Index eval_real = 1000;
  int eval_projections = 128;

  std::filesystem::path output_root = "runs";

  /// Applies one `key = value` assignment; unknown keys and bad values throw ConfigError.
  void set(const std::string& key, const std::string& value);
  /// Resolves derived fields and checks cross-field invariants.
  void finalize();
  /// Every key with its current value, in a fixed order (excludes output.root).
  std::vector<std::pair<std::string, std::string>> entries() const;
  /// Canonical `key=value` text; the config hash is computed from it.
  std::string canonical() const;
  /// 16 hex digits of FNV-1a over `canonical()`.
  std::string hash() const;
};

/// Known keys, in canonical order.
const std::vector<std::string>& config_keys();

/// Parses a config file. Blank lines and `#` comments are ignored.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");

std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace mgs::io
