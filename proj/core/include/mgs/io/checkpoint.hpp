#pragma once

#include <filesystem>

#include "mgs/diffusion/eps_model.hpp"
#include "mgs/manifold/model.hpp"

namespace mgs::io {

// Checkpoint layout (all integers and floats little-endian):
//
//   "MGSN"                  4 bytes magic
//   u32 version             currently 1
//   u32 section count
//   per section:
//     4-byte tag            "EPSM" (noise model), "EMBF" (embedder F), "RELG" (relation net g)
//     u32 scalar count, then that many f64 scalars
//         EPSM: [embed_dim]   EMBF: [normalize (0/1)]   RELG: [tau]
//     u32 layer count
//     per layer: u32 in, u32 out, u32 activation (0 identity, 1 tanh, 2 relu, 3 sigmoid)
//     per layer: out*in f64 weights (row-major), then out f64 biases

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_eps_model(const diffusion::EpsModel& model, const std::filesystem::path& path);
diffusion::EpsModel load_eps_model(const std::filesystem::path& path);

void save_manifold_model(const manifold::ManifoldModel& model, const std::filesystem::path& path);
manifold::ManifoldModel load_manifold_model(const std::filesystem::path& path);

}  // namespace mgs::io
