#pragma once

#include "mgs/common.hpp"

namespace mgs::nn {

/// Sinusoidal timestep embedding for 1-based timesteps.
///
/// For k in [0, dim/2): out[2k] = sin(w_k t), out[2k+1] = cos(w_k t) with
/// w_k = 10000^(-2k/dim). For dim = 2 the single frequency is
/// w_0 = 1, so the embedding is [sin t, cos t]. Every entry lies in [-1, 1],
/// hence the norm is sqrt(dim/2) <= sqrt(dim).
Vector time_embed(int t, int dim);

}  // namespace mgs::nn
