#include "mgs/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace mgs::nn {

GradCheckReport finite_diff_check(const LossFn& loss, const Vector& point, const Vector& analytic,
                                  double step, double abs_floor, const KinkFn& kinks) {
  require(point.size() == analytic.size(), "finite_diff_check: gradient size mismatch");
  require(step > 0.0, "finite_diff_check: step must be positive");
  GradCheckReport report;
  report.step = step;
  if (!std::isfinite(loss(point))) throw NumericError("finite_diff_check: loss is not finite at the point");
  if (kinks) {
    report.excluded = kinks(point, 1e-6);
    std::sort(report.excluded.begin(), report.excluded.end());
  }
  Vector probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    if (std::binary_search(report.excluded.begin(), report.excluded.end(), i)) continue;
    probe(i) = point(i) + step;
    double up = loss(probe);
    probe(i) = point(i) - step;
    double down = loss(probe);
    probe(i) = point(i);
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("finite_diff_check: loss is not finite near coordinate " + std::to_string(i));
    double fd = (up - down) / (2.0 * step);
    double diff = std::abs(analytic(i) - fd);
    double rel = diff < abs_floor ? 0.0 : diff / std::max(1e-12, std::abs(fd));
    if (rel > report.max_relative_error || report.argmax < 0) {
      report.max_relative_error = std::max(report.max_relative_error, rel);
      report.argmax = i;
    }
  }
  return report;
}

}  // namespace mgs::nn
