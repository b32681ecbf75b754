#pragma once

#include <optional>
#include <string>
#include <vector>

#include "camp/denoise.hpp"
#include "camp/model.hpp"

namespace camp {

enum class Algorithm { Camp, Amp, OampVamp };

std::string algorithm_name(Algorithm a);
std::optional<Algorithm> algorithm_from_name(const std::string& s);

struct SolverConfig {
  Algorithm algorithm = Algorithm::Camp;
  int iterations = 100;
  std::vector<double> taps;  // convolution taps g_t^(1); required for Camp
  Denoiser denoiser;
  double noise_variance = 0.0;      // used by the LMMSE baseline
  const Vector* truth = nullptr;    // enables per-iteration MSE recording
};

struct SolverTrajectory {
  Algorithm algorithm = Algorithm::Camp;
  int iterations_run = 0;
  // Residual history z_0..z_{t}: the convolution consumes the full history,
  // so memory is O(T M + N) by design. Empty for the LMMSE baseline.
  std::vector<Vector> z_history;
  std::vector<double> a_history;      // divergence means <f'_t(r_t)>
  std::vector<double> theta_used;     // realized threshold schedule
  Vector x_final;
  std::vector<double> mse_history;    // ||x_{t+1} - truth||^2 / N per step
  std::optional<int> diverged_at;     // first iteration with non-finite state
  bool stalled = false;               // LMMSE baseline: degenerate 1/(1-<f'>)

  double final_mse(const Vector& truth) const;
};

// Message passing with a convolutional correction: the residual update adds
// sum_{tau < t} xi_tau^(t-1) g_{t-tau-1}^(1) z_tau, where xi products of the
// divergence means are maintained incrementally at O(t) per iteration.
SolverTrajectory camp_run(const SensingEnsemble& ensemble,
                          const Measurement& measurement,
                          const SolverConfig& config);

// Memory-one special case: the correction keeps only the latest residual,
// z_t = y - A x_t + (a_{t-1} / delta) z_{t-1}.
SolverTrajectory amp_run(const SensingEnsemble& ensemble,
                         const Measurement& measurement,
                         const SolverConfig& config);

// LMMSE baseline: per iteration a residual-calibrated LMMSE linear stage
// applied through the SVD, trace-normalized to a divergence-free linear
// estimate, followed by a divergence-free thresholding step.
SolverTrajectory oamp_vamp_run(const SensingEnsemble& ensemble,
                               const Measurement& measurement,
                               const SolverConfig& config);

SolverTrajectory run_solver(const SensingEnsemble& ensemble,
                            const Measurement& measurement,
                            const SolverConfig& config);

// The xi product table the solver maintained, rebuilt step by step with the
// identical multiplication order: row t holds xi_tau^(t-1) for tau = 0..t-1.
std::vector<std::vector<double>> xi_product_rows(
    const std::vector<double>& a_history);

}  // namespace camp
