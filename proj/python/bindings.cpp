// Python module exposing the core operations: tap generation, solver runs,
// and the verification diagnostics. Plain lists in and out; no numpy
// dependency.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>

#include "camp/bench.hpp"
#include "camp/denoise.hpp"
#include "camp/diagnostics.hpp"
#include "camp/model.hpp"
#include "camp/solvers.hpp"
#include "camp/spectral.hpp"

namespace py = pybind11;

namespace {

std::vector<double> taps_from_table(const camp::TapTable& table) {
  if (table.overflowed)
    throw std::runtime_error("tap recursion left finite range at t = " +
                             std::to_string(table.first_bad_t));
  return table.taps;
}

camp::TrialInstance build_instance(int M, int N, double kappa, double rho,
                                   double snr_db, std::uint64_t seed) {
  camp::SweepConfig config;
  config.M = M;
  config.N = N;
  config.rho = rho;
  config.snr_db = snr_db;
  return camp::make_trial_instance(config, kappa,
                                   camp::instance_seed(seed, kappa, 0));
}

py::dict run_trial(const std::string& algorithm, int M, int N, double kappa,
                   double rho, double snr_db, int iterations, double theta,
                   std::uint64_t seed) {
  auto alg = camp::algorithm_from_name(algorithm);
  if (!alg) throw std::invalid_argument("unknown algorithm: " + algorithm);
  camp::TrialInstance inst = build_instance(M, N, kappa, rho, snr_db, seed);
  camp::SolverConfig sc;
  sc.algorithm = *alg;
  sc.iterations = iterations;
  sc.taps = camp::sweep_taps(static_cast<double>(M) / N, kappa, iterations);
  sc.denoiser.theta = theta;
  sc.noise_variance = camp::snr_db_to_noise_variance(snr_db);
  sc.truth = &inst.x_star;
  camp::SolverTrajectory traj =
      camp::run_solver(inst.ensemble, inst.measurement, sc);
  py::dict out;
  out["algorithm"] = camp::algorithm_name(*alg);
  out["final_mse"] = traj.final_mse(inst.x_star);
  out["final_mse_db"] = camp::mse_db(traj.final_mse(inst.x_star));
  out["mse_history"] = traj.mse_history;
  out["iterations_run"] = traj.iterations_run;
  out["diverged"] = traj.diverged_at.has_value();
  out["stalled"] = traj.stalled;
  return out;
}

double error_recursion_residual(int M, int N, double kappa, int iterations,
                                double theta, std::uint64_t seed) {
  camp::TrialInstance inst = build_instance(M, N, kappa, 0.1, 30.0, seed);
  camp::SolverConfig sc;
  sc.algorithm = camp::Algorithm::Camp;
  sc.iterations = iterations;
  sc.taps = camp::sweep_taps(static_cast<double>(M) / N, kappa, iterations);
  sc.denoiser.theta = theta;
  auto traj = camp::run_solver(inst.ensemble, inst.measurement, sc);
  auto decomp = camp::decompose_errors(traj, inst.x_star, inst.ensemble);
  return camp::verify_error_recursion(decomp, inst.ensemble, sc.taps,
                                      inst.measurement.noise);
}

py::dict gaussianity(int M, int N, double kappa, int iteration, double theta,
                     std::uint64_t seed) {
  camp::TrialInstance inst = build_instance(M, N, kappa, 0.1, 30.0, seed);
  camp::SolverConfig sc;
  sc.algorithm = camp::Algorithm::Camp;
  sc.iterations = iteration;
  sc.taps = camp::sweep_taps(static_cast<double>(M) / N, kappa, iteration);
  sc.denoiser.theta = theta;
  auto traj = camp::run_solver(inst.ensemble, inst.measurement, sc);
  auto decomp = camp::decompose_errors(traj, inst.x_star, inst.ensemble);
  if (decomp.h.empty()) throw std::runtime_error("no iterations recorded");
  auto report = camp::gaussianity_report(decomp.h.back());
  py::dict out;
  out["skewness"] = report.skewness;
  out["excess_kurtosis"] = report.excess_kurtosis;
  out["ks_distance"] = report.ks_distance;
  out["degenerate"] = report.degenerate;
  return out;
}

std::vector<py::dict> generating_function_check(
    const std::vector<double>& taps, double delta, double kappa,
    const std::vector<double>& y_grid) {
  camp::SpectralProfile profile =
      kappa > 1.0 ? camp::asymptotic_moments_geometric(
                        delta, kappa, static_cast<int>(taps.size()) + 2)
                  : camp::marchenko_pastur_moments(
                        delta, static_cast<int>(taps.size()) + 2);
  auto rows = camp::verify_tap_generating_function(taps, profile, y_grid);
  std::vector<py::dict> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    py::dict d;
    d["y"] = r.y;
    d["residual"] = r.residual;
    d["flagged"] = r.flagged;
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(campcore, m) {
  m.doc() =
      "Convolutional message-passing reconstruction: taps, solvers, "
      "verification";

  m.def("geometric_singular_values", &camp::geometric_singular_values,
        py::arg("m"), py::arg("n"), py::arg("kappa"),
        "Constant-ratio singular values normalized to sum of squares n");

  m.def("taps_closed_form", &camp::taps_geometric_closed_form,
        py::arg("delta"), py::arg("kappa"), py::arg("iterations"),
        "Closed-form convolution taps for the constant-ratio spectrum");
  m.def("taps_equal_spectrum", &camp::taps_equal_spectrum, py::arg("delta"),
        py::arg("iterations"),
        "Constant taps (1 - delta) / delta of the equal-eigenvalue spectrum");
  m.def(
      "tap_recursion_geometric",
      [](double delta, double kappa, int T) {
        auto profile = camp::asymptotic_moments_geometric(delta, kappa, T + 2);
        return taps_from_table(camp::tap_recursion(profile, T));
      },
      py::arg("delta"), py::arg("kappa"), py::arg("iterations"),
      "Moment-recursion taps for the constant-ratio spectrum");
  m.def(
      "tap_recursion_mp",
      [](double delta, int T) {
        auto profile = camp::marchenko_pastur_moments(delta, T + 2);
        return taps_from_table(camp::tap_recursion(profile, T));
      },
      py::arg("delta"), py::arg("iterations"),
      "Moment-recursion taps for the iid-ensemble limiting spectrum");
  m.def(
      "tap_recursion_moments",
      [](const std::vector<double>& moments, int T) {
        auto profile = camp::profile_from_moments(moments);
        return taps_from_table(camp::tap_recursion(profile, T));
      },
      py::arg("moments"), py::arg("iterations"),
      "Moment-recursion taps from an explicit moment list (mu_0 first)");

  m.def(
      "eta_geometric",
      [](double delta, double kappa, double z) {
        return camp::asymptotic_moments_geometric(delta, kappa, 2).eta(z);
      },
      py::arg("delta"), py::arg("kappa"), py::arg("z"),
      "eta-transform of the constant-ratio limiting spectrum");
  m.def(
      "eta_mp",
      [](double delta, double z) {
        return camp::marchenko_pastur_moments(delta, 2).eta(z);
      },
      py::arg("delta"), py::arg("z"),
      "eta-transform of the iid-ensemble limiting spectrum");

  m.def("generating_function_check", &generating_function_check,
        py::arg("taps"), py::arg("delta"), py::arg("kappa"),
        py::arg("y_grid"),
        "Consistency residuals between taps and the spectrum transform "
        "(kappa = 1 selects the iid-ensemble spectrum)");

  m.def("soft_threshold", &camp::soft_threshold, py::arg("x"),
        py::arg("theta"), "Scalar soft threshold");
  m.def(
      "soft_threshold_vec",
      [](const std::vector<double>& x, double theta) {
        std::vector<double> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
          out[i] = camp::soft_threshold(x[i], theta);
        return out;
      },
      py::arg("x"), py::arg("theta"), "Elementwise soft threshold");

  m.def("run_trial", &run_trial, py::arg("algorithm"), py::arg("m"),
        py::arg("n"), py::arg("kappa"), py::arg("rho") = 0.1,
        py::arg("snr_db") = 30.0, py::arg("iterations") = 100,
        py::arg("theta") = 1.4, py::arg("seed") = 1,
        "One reconstruction on a sampled instance; returns summary dict");

  m.def("error_recursion_residual", &error_recursion_residual, py::arg("m"),
        py::arg("n"), py::arg("kappa"), py::arg("iterations") = 10,
        py::arg("theta") = 1.2, py::arg("seed") = 1,
        "Max relative residual of the exact error-evolution identity");

  m.def("gaussianity", &gaussianity, py::arg("m"), py::arg("n"),
        py::arg("kappa"), py::arg("iteration") = 10, py::arg("theta") = 1.2,
        py::arg("seed") = 1,
        "Moments and KS distance of the pre-thresholding error");

  m.def("mse", &camp::mse, py::arg("x_est"), py::arg("x_star"),
        "Mean squared error");
  m.def("mse_db", &camp::mse_db, py::arg("mse_linear"), "10 log10(mse)");
}
