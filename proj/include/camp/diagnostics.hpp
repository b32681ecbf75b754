#pragma once

#include <optional>
#include <vector>

#include "camp/model.hpp"
#include "camp/solvers.hpp"

namespace camp {

// Per-iteration error vectors of a convolutional-correction run, expressed
// in the right singular basis:
//   h_t = r_t - x*           pre-thresholding error
//   q_t = x_t - x*           post-thresholding error
//   qt_t = q_t - a_{t-1} h_{t-1}   (qt_0 = q_0)
//   b_t = V^T qt_t,  m_t = V^T h_t
struct ErrorDecomposition {
  std::vector<Vector> h, q, q_tilde, b, m;
  std::vector<double> a;  // divergence means, one per recorded iteration
};

// Replays x_t and r_t from the stored residual history (the stored schedule
// reproduces the thresholds bit-for-bit) and projects the errors onto the
// ensemble's full right factor.
ErrorDecomposition decompose_errors(const SolverTrajectory& trajectory,
                                    const Vector& x_star,
                                    const SensingEnsemble& ensemble);

// Algebraic identity satisfied by m_t for every finite run: the projected
// pre-thresholding error equals the filtered carry of the previous errors
// plus the projected noise plus the convolutional correction, exactly.
// Returns max_t ||RHS_t - m_t|| / ||m_t||; failures indicate bookkeeping
// bugs, not statistical deviations, because the relation holds at any size.
double verify_error_recursion(const ErrorDecomposition& decomposition,
                              const SensingEnsemble& ensemble,
                              const std::vector<double>& taps,
                              const Vector& noise_w);

struct GaussianityReport {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks_distance = 0.0;
  bool degenerate = false;  // zero variance: statistics undefined
};

// Moments and Kolmogorov-Smirnov distance of a vector's entries against a
// zero-mean Gaussian whose variance is fitted from the sample (or supplied).
GaussianityReport gaussianity_report(
    const Vector& h, std::optional<double> predicted_variance = std::nullopt);

double mse(const Vector& x_est, const Vector& x_star);
double mse_db(double mse_linear);

}  // namespace camp
