#pragma once

#include <functional>
#include <vector>

#include "mgs/common.hpp"

namespace mgs::nn {

struct GradCheckReport {
  double max_relative_error = 0.0;
  Eigen::Index argmax = -1;
  double step = 0.0;
  /// Coordinates where the loss is not smooth within one step (relu kinks).
  std::vector<Eigen::Index> excluded;
};

/// Scalar loss of a flat point.
using LossFn = std::function<double(const Vector&)>;
/// Coordinates of a flat point that sit within `tol` of a non-differentiable kink.
using KinkFn = std::function<std::vector<Eigen::Index>(const Vector&, double tol)>;

/// Compares `analytic` against central differences of `loss` at `point`.
/// Relative error per coordinate is |g_a - g_fd| / max(1e-12, |g_fd|); tiny
/// absolute differences (below `abs_floor`) count as zero error, so that
/// coordinates with vanishing gradient do not dominate.
GradCheckReport finite_diff_check(const LossFn& loss, const Vector& point, const Vector& analytic,
                                  double step = 1e-5, double abs_floor = 1e-9,
                                  const KinkFn& kinks = {});

}  // namespace mgs::nn
