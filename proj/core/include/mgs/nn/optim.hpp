#pragma once

#include <cstdint>

#include "mgs/common.hpp"

namespace mgs::nn {

struct AdamState {
  Vector first_moment;
  Vector second_moment;
  std::uint64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState make(Eigen::Index parameter_count, double learning_rate);
};

/// Bias-corrected Adam update. `state` buffers must mirror `params`.
void adam_step(AdamState& state, Vector& params, const Vector& grads);

void sgd_step(double learning_rate, Vector& params, const Vector& grads);

}  // namespace mgs::nn
