#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace camp {

// Soft-thresholding scalar nonlinearity.
inline double soft_threshold(double x, double theta) {
  if (x >= theta) return x - theta;
  if (x <= -theta) return x + theta;
  return 0.0;
}

// Almost-everywhere derivative. The measure-zero boundary |x| = theta maps
// to 0 so that trajectories are bit-reproducible.
inline double soft_threshold_derivative(double x, double theta) {
  return std::fabs(x) > theta ? 1.0 : 0.0;
}

// Arithmetic mean of the derivative over a vector: the fraction of entries
// strictly beyond the threshold. Summation is sequential by construction so
// the result does not depend on any parallel reduction order.
inline double divergence_mean(const std::vector<double>& v, double theta) {
  std::size_t count = 0;
  for (double x : v) {
    if (std::fabs(x) > theta) ++count;
  }
  return v.empty() ? 0.0 : static_cast<double>(count) / v.size();
}

// Threshold schedule: a constant value (the default protocol) or an explicit
// per-iteration sequence.
struct Denoiser {
  double theta = 0.0;
  std::vector<double> theta_schedule;  // overrides `theta` when nonempty

  double theta_at(int t) const {
    if (!theta_schedule.empty()) {
      if (t < 0) t = 0;
      auto idx = static_cast<std::size_t>(t);
      if (idx >= theta_schedule.size()) idx = theta_schedule.size() - 1;
      return theta_schedule[idx];
    }
    return theta;
  }
};

}  // namespace camp
