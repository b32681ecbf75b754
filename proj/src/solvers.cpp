#include "camp/solvers.hpp"

#include <cmath>
#include <stdexcept>

namespace camp {

namespace {

bool all_finite(const Vector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

double mse_against(const Vector& x, const Vector& truth) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - truth[i];
    acc += d * d;
  }
  return acc / x.size();
}

// Shared message-passing loop. AMP is the memory_one = true specialization:
// the correction term keeps only the latest residual with coefficient
// a_{t-1} / delta, which coincides with the convolutional sum when the tap
// sequence is (1/delta, 0, 0, ...). Both paths run the identical statement
// order so the reduction identity holds to rounding error.
SolverTrajectory message_passing(const SensingEnsemble& ensemble,
                                 const Measurement& measurement,
                                 const SolverConfig& config, bool memory_one) {
  const int N = ensemble.N;
  const int T = config.iterations;
  const double inv_delta = static_cast<double>(ensemble.N) / ensemble.M;

  SolverTrajectory traj;
  traj.algorithm = memory_one ? Algorithm::Amp : Algorithm::Camp;
  if (!memory_one && static_cast<int>(config.taps.size()) < T)
    throw std::invalid_argument("camp_run: taps shorter than iteration count");

  Vector x(N, 0.0);
  std::vector<double> xi;  // xi[tau] = prod_{s=tau}^{t-1} a_s
  for (int t = 0; t < T; ++t) {
    // Residual with convolutional correction.
    Vector z = measurement.y;
    {
      Vector ax = ensemble.forward(x);
      for (int i = 0; i < ensemble.M; ++i) z[i] -= ax[i];
    }
    if (memory_one) {
      if (t >= 1) {
        double coef = xi[t - 1] * inv_delta;
        const Vector& zprev = traj.z_history[t - 1];
        for (int i = 0; i < ensemble.M; ++i) z[i] += coef * zprev[i];
      }
    } else {
      for (int tau = 0; tau < t; ++tau) {
        double coef = xi[tau] * config.taps[t - tau - 1];
        const Vector& zold = traj.z_history[tau];
        for (int i = 0; i < ensemble.M; ++i) z[i] += coef * zold[i];
      }
    }

    Vector r = ensemble.adjoint(z);
    for (int i = 0; i < N; ++i) r[i] += x[i];

    if (!all_finite(z) || !all_finite(r)) {
      traj.diverged_at = t;
      break;
    }

    double theta = config.denoiser.theta_at(t);
    double a = divergence_mean(r, theta);
    for (int i = 0; i < N; ++i) x[i] = soft_threshold(r[i], theta);

    for (auto& p : xi) p *= a;
    xi.push_back(a);
    traj.z_history.push_back(std::move(z));
    traj.a_history.push_back(a);
    traj.theta_used.push_back(theta);
    traj.iterations_run = t + 1;
    if (config.truth) traj.mse_history.push_back(mse_against(x, *config.truth));
  }
  traj.x_final = std::move(x);
  return traj;
}

}  // namespace

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Camp: return "camp";
    case Algorithm::Amp: return "amp";
    case Algorithm::OampVamp: return "oamp-vamp";
  }
  return "unknown";
}

std::optional<Algorithm> algorithm_from_name(const std::string& s) {
  if (s == "camp") return Algorithm::Camp;
  if (s == "amp") return Algorithm::Amp;
  if (s == "oamp-vamp" || s == "oamp" || s == "vamp") return Algorithm::OampVamp;
  return std::nullopt;
}

double SolverTrajectory::final_mse(const Vector& truth) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < x_final.size(); ++i) {
    double d = x_final[i] - truth[i];
    acc += d * d;
  }
  return acc / x_final.size();
}

SolverTrajectory camp_run(const SensingEnsemble& ensemble,
                          const Measurement& measurement,
                          const SolverConfig& config) {
  return message_passing(ensemble, measurement, config, false);
}

SolverTrajectory amp_run(const SensingEnsemble& ensemble,
                         const Measurement& measurement,
                         const SolverConfig& config) {
  return message_passing(ensemble, measurement, config, true);
}

SolverTrajectory oamp_vamp_run(const SensingEnsemble& ensemble,
                               const Measurement& measurement,
                               const SolverConfig& config) {
  const int N = ensemble.N;
  const int M = ensemble.M;
  const int T = config.iterations;
  const double sigma2 = config.noise_variance;
  const double trace = ensemble.trace_gram();
  const auto& sv = ensemble.svd().singular_values;
  constexpr double kVarianceFloor = 1e-12;

  SolverTrajectory traj;
  traj.algorithm = Algorithm::OampVamp;

  Vector x(N, 0.0);
  for (int t = 0; t < T; ++t) {
    Vector e = measurement.y;
    {
      Vector ax = ensemble.forward(x);
      for (int i = 0; i < M; ++i) e[i] -= ax[i];
    }
    double e_sq = 0.0;
    for (double v : e) e_sq += v * v;
    double vt = (e_sq - M * sigma2) / trace;
    if (!(vt > kVarianceFloor)) vt = kVarianceFloor;

    // LMMSE filter through the SVD: d_j = vt s_j ehat_j / (vt s_j^2 + s2).
    Vector ehat = ensemble.apply_ut(e);
    Vector d(M, 0.0);
    double trace_wa = 0.0;
    for (int j = 0; j < M; ++j) {
      double den = vt * sv[j] * sv[j] + sigma2;
      d[j] = vt * sv[j] * ehat[j] / den;
      trace_wa += vt * sv[j] * sv[j] / den;
    }
    Vector corr = ensemble.apply_v_cols(d);
    double gain = static_cast<double>(N) / trace_wa;
    Vector r(N, 0.0);
    for (int i = 0; i < N; ++i) r[i] = x[i] + gain * corr[i];

    if (!all_finite(r)) {
      traj.diverged_at = t;
      break;
    }

    double theta = config.denoiser.theta_at(t);
    double a = divergence_mean(r, theta);
    traj.a_history.push_back(a);
    traj.theta_used.push_back(theta);
    if (a >= 1.0 - 1e-12) {
      // The divergence-free combination 1/(1-a) degenerates; fall back to the
      // plain thresholded estimate and stop.
      for (int i = 0; i < N; ++i) x[i] = soft_threshold(r[i], theta);
      traj.stalled = true;
      traj.iterations_run = t + 1;
      if (config.truth)
        traj.mse_history.push_back(mse_against(x, *config.truth));
      break;
    }
    double c = 1.0 / (1.0 - a);
    for (int i = 0; i < N; ++i)
      x[i] = c * (soft_threshold(r[i], theta) - a * r[i]);
    if (!all_finite(x)) {
      traj.diverged_at = t;
      break;
    }
    traj.iterations_run = t + 1;
    if (config.truth) traj.mse_history.push_back(mse_against(x, *config.truth));
  }
  traj.x_final = std::move(x);
  return traj;
}

SolverTrajectory run_solver(const SensingEnsemble& ensemble,
                            const Measurement& measurement,
                            const SolverConfig& config) {
  switch (config.algorithm) {
    case Algorithm::Camp: return camp_run(ensemble, measurement, config);
    case Algorithm::Amp: return amp_run(ensemble, measurement, config);
    case Algorithm::OampVamp:
      return oamp_vamp_run(ensemble, measurement, config);
  }
  throw std::logic_error("run_solver: unknown algorithm");
}

std::vector<std::vector<double>> xi_product_rows(
    const std::vector<double>& a_history) {
  // Row t replays the solver's state just before iteration t: the stored
  // products are multiplied by each new a in the same order the solver
  // applied them, so every entry is bit-identical to what the solver used.
  std::vector<std::vector<double>> rows(a_history.size() + 1);
  std::vector<double> xi;
  for (std::size_t t = 0; t < a_history.size(); ++t) {
    rows[t] = xi;  // xi_tau^(t-1) for tau = 0..t-1, state before iteration t
    for (auto& p : xi) p *= a_history[t];
    xi.push_back(a_history[t]);
  }
  rows[a_history.size()] = xi;
  return rows;
}

}  // namespace camp
