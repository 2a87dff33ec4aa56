#include "mgs/nn/time_embed.hpp"

#include <cmath>

namespace mgs::nn {

Vector time_embed(int t, int dim) {
  require(t >= 1, "time_embed: timesteps are 1-based");
  require(dim > 0 && dim % 2 == 0, "time_embed: dim must be positive and even");
  Vector out(dim);
  for (int k = 0; k < dim / 2; ++k) {
    double w = std::pow(10000.0, -2.0 * k / dim);
    out(2 * k) = std::sin(w * t);
    out(2 * k + 1) = std::cos(w * t);
  }
  return out;
}

}  // namespace mgs::nn
