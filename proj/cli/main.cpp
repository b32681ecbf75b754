// Command-line front end: tap tables, single reconstructions, threshold
// sweeps across condition numbers, and run diagnostics.
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "camp/bench.hpp"
#include "camp/diagnostics.hpp"
#include "camp/model.hpp"
#include "camp/solvers.hpp"
#include "camp/spectral.hpp"

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int cmd_taps(double delta, double kappa, int iterations,
             const std::string& source, const std::string& moments_file,
             bool shadow) {
  std::vector<double> taps;
  camp::TapTable table;
  bool have_table = false;
  if (!moments_file.empty()) {
    std::ifstream in(moments_file);
    if (!in) {
      std::cerr << "error: cannot open moments file '" << moments_file
                << "'\n";
      return 2;
    }
    std::vector<double> moments;
    double v;
    while (in >> v) moments.push_back(v);
    auto profile = camp::profile_from_moments(moments);
    table = camp::tap_recursion(profile, iterations, shadow ? 0 : 1);
    taps = table.taps;
    have_table = true;
  } else if (source == "recursion") {
    if (kappa == 1.0) {
      taps = camp::taps_equal_spectrum(delta, iterations);
    } else {
      auto profile =
          camp::asymptotic_moments_geometric(delta, kappa, iterations + 2);
      table = camp::tap_recursion(profile, iterations, shadow ? 0 : 1);
      taps = table.taps;
      have_table = true;
    }
  } else {
    taps = camp::sweep_taps(delta, kappa, iterations);
  }
  std::cout << "# t tap\n";
  for (std::size_t t = 0; t < taps.size(); ++t)
    std::cout << t << " " << fmt(taps[t]) << "\n";
  if (have_table && table.overflowed) {
    std::cerr << "warning: recursion left finite range at t = "
              << table.first_bad_t << "; rows truncated\n";
  }
  return 0;
}

int cmd_run(const std::string& algorithm_str, double kappa, int M, int N,
            double rho, double snr_db, int iterations, double theta,
            std::uint64_t seed) {
  auto algorithm = camp::algorithm_from_name(algorithm_str);
  if (!algorithm) {
    std::cerr << "error: unknown algorithm '" << algorithm_str << "'\n";
    return 2;
  }
  camp::SweepConfig config;
  config.M = M;
  config.N = N;
  config.rho = rho;
  config.snr_db = snr_db;
  config.iterations = iterations;
  camp::TrialInstance inst = camp::make_trial_instance(
      config, kappa, camp::instance_seed(seed, kappa, 0));

  camp::SolverConfig sc;
  sc.algorithm = *algorithm;
  sc.iterations = iterations;
  sc.taps = camp::sweep_taps(config.M / static_cast<double>(config.N), kappa,
                             iterations);
  sc.denoiser.theta = theta;
  sc.noise_variance = config.noise_variance();
  sc.truth = &inst.x_star;
  camp::SolverTrajectory traj =
      camp::run_solver(inst.ensemble, inst.measurement, sc);

  std::cout << "# algorithm=" << camp::algorithm_name(*algorithm)
            << " kappa=" << fmt(kappa) << " M=" << M << " N=" << N
            << " theta=" << fmt(theta) << " seed=" << seed << "\n";
  std::cout << "# t mse_db a_t\n";
  for (int t = 0; t < traj.iterations_run; ++t) {
    double db = camp::mse_db(traj.mse_history[t]);
    double a = t < static_cast<int>(traj.a_history.size())
                   ? traj.a_history[t]
                   : 0.0;
    std::cout << t << " " << fmt(db) << " " << fmt(a) << "\n";
  }
  std::cout << "final_mse=" << fmt(traj.final_mse(inst.x_star))
            << " final_mse_db=" << fmt(camp::mse_db(traj.final_mse(inst.x_star)))
            << "\n";
  if (traj.diverged_at) {
    std::cerr << "diverged at iteration " << *traj.diverged_at << "\n";
    return 3;
  }
  if (traj.stalled) std::cerr << "note: linear stage stalled; stopped early\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, std::optional<std::uint64_t> seed,
              std::optional<int> trials, std::optional<int> workers,
              bool full_scale, const std::string& output_override) {
  camp::SweepConfig config;
  try {
    if (!config_path.empty()) config = camp::parse_config_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (seed) config.master_seed = *seed;
  if (trials) config.trials = *trials;
  if (workers) config.workers = *workers;
  if (full_scale) config.full_scale = true;
  if (!output_override.empty()) config.output_path = output_override;
  if (config.trials < 1 || config.workers < 1) {
    std::cerr << "error: trials and workers must be positive\n";
    return 2;
  }

  camp::SweepResult result = camp::run_sweep(config);
  std::cout << "algorithm kappa theta trials diverged mean_mse_db stderr_db\n";
  for (const auto& a : result.aggregates) {
    std::cout << a.algorithm << " " << fmt(a.kappa) << " " << fmt(a.theta)
              << " " << a.trials << " " << a.diverged << " "
              << fmt(a.mean_mse_db) << " " << fmt(a.stderr_db) << "\n";
  }
  try {
    auto paths = camp::write_sweep_outputs(config, result);
    for (const auto& p : paths) std::cerr << "wrote " << p << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_diagnose(double kappa, int M, int N, int iteration, double theta,
                 std::uint64_t seed) {
  camp::SweepConfig config;
  config.M = M;
  config.N = N;
  config.iterations = iteration;
  camp::TrialInstance inst = camp::make_trial_instance(
      config, kappa, camp::instance_seed(seed, kappa, 0));

  camp::SolverConfig sc;
  sc.algorithm = camp::Algorithm::Camp;
  sc.iterations = iteration;
  sc.taps = camp::sweep_taps(config.M / static_cast<double>(config.N), kappa,
                             iteration);
  sc.denoiser.theta = theta;
  sc.noise_variance = config.noise_variance();
  sc.truth = &inst.x_star;
  camp::SolverTrajectory traj =
      camp::run_solver(inst.ensemble, inst.measurement, sc);

  auto decomp = camp::decompose_errors(traj, inst.x_star, inst.ensemble);
  double residual = camp::verify_error_recursion(decomp, inst.ensemble,
                                                 sc.taps,
                                                 inst.measurement.noise);
  std::cout << "error_recursion_residual=" << fmt(residual) << "\n";

  if (!decomp.h.empty()) {
    const camp::Vector& h_last = decomp.h.back();
    auto report = camp::gaussianity_report(h_last);
    std::cout << "iteration=" << (decomp.h.size() - 1)
              << " skewness=" << fmt(report.skewness)
              << " excess_kurtosis=" << fmt(report.excess_kurtosis)
              << " ks_distance=" << fmt(report.ks_distance)
              << (report.degenerate ? " degenerate=1" : "") << "\n";
  }
  if (!(residual <= 1e-8)) {
    std::cerr << "error recursion residual exceeds 1e-8\n";
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Convolutional message-passing reconstruction: taps, runs, sweeps, "
      "diagnostics"};
  app.require_subcommand(1);

  // taps
  double taps_delta = 0.6, taps_kappa = 10.0;
  int taps_iterations = 20;
  std::string taps_source = "closed", taps_moments_file;
  bool taps_shadow = false;
  auto* taps = app.add_subcommand("taps", "Print the convolution tap table");
  taps->add_option("--delta", taps_delta, "Aspect ratio M / N");
  taps->add_option("--kappa", taps_kappa, "Condition number (>= 1)");
  taps->add_option("--iterations", taps_iterations, "Horizon T");
  taps->add_option("--source", taps_source, "closed | recursion")
      ->check(CLI::IsMember({"closed", "recursion"}));
  taps->add_option("--moments-file", taps_moments_file,
                   "Whitespace-separated spectrum moments (mu_0 first); "
                   "implies the recursion");
  taps->add_flag("--shadow", taps_shadow,
                 "Include the k = 0 consistency row in the recursion");

  // run
  std::string run_algorithm = "camp";
  double run_kappa = 10.0, run_rho = 0.1, run_snr = 30.0, run_theta = 1.4;
  int run_m = 614, run_n = 1024, run_iterations = 100;
  std::uint64_t run_seed = 1;
  auto* run = app.add_subcommand("run", "Run one reconstruction, verbose");
  run->add_option("--algorithm", run_algorithm, "camp | amp | oamp-vamp");
  run->add_option("--kappa", run_kappa, "Condition number");
  run->add_option("--m", run_m, "Rows");
  run->add_option("--n", run_n, "Columns (power of two)");
  run->add_option("--rho", run_rho, "Signal density");
  run->add_option("--snr-db", run_snr, "SNR in dB (sets noise variance)");
  run->add_option("--iterations", run_iterations, "Iteration count");
  run->add_option("--theta", run_theta, "Threshold");
  run->add_option("--seed", run_seed, "Seed");

  // sweep
  std::string sweep_config, sweep_output;
  std::uint64_t sweep_seed_val = 0;
  int sweep_trials_val = 0, sweep_workers_val = 0;
  bool sweep_full_scale = false;
  bool sweep_seed_set = false, sweep_trials_set = false,
       sweep_workers_set = false;
  auto* sweep = app.add_subcommand(
      "sweep", "Condition-number sweep with pilot threshold selection");
  sweep->add_option("--config", sweep_config, "key = value config file");
  sweep->add_option("--seed", sweep_seed_val, "Master seed override")
      ->each([&](const std::string&) { sweep_seed_set = true; });
  sweep->add_option("--trials", sweep_trials_val, "Trials override")
      ->each([&](const std::string&) { sweep_trials_set = true; });
  sweep->add_option("--workers", sweep_workers_val, "Worker thread count")
      ->each([&](const std::string&) { sweep_workers_set = true; });
  sweep->add_flag("--full-scale", sweep_full_scale,
                  "Publication-scale trial count (100000)");
  sweep->add_option("--output", sweep_output, "Output CSV path prefix");

  // diagnose
  double diag_kappa = 100.0, diag_theta = 1.2;
  int diag_m = 614, diag_n = 1024, diag_iteration = 10;
  std::uint64_t diag_seed = 1;
  auto* diag = app.add_subcommand(
      "diagnose", "Error-recursion identity and Gaussianity statistics");
  diag->add_option("--kappa", diag_kappa, "Condition number");
  diag->add_option("--m", diag_m, "Rows");
  diag->add_option("--n", diag_n, "Columns (power of two)");
  diag->add_option("--iteration", diag_iteration, "Inspection iteration");
  diag->add_option("--theta", diag_theta, "Threshold");
  diag->add_option("--seed", diag_seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (taps->parsed())
      return cmd_taps(taps_delta, taps_kappa, taps_iterations, taps_source,
                      taps_moments_file, taps_shadow);
    if (run->parsed())
      return cmd_run(run_algorithm, run_kappa, run_m, run_n, run_rho, run_snr,
                     run_iterations, run_theta, run_seed);
    if (sweep->parsed())
      return cmd_sweep(
          sweep_config,
          sweep_seed_set ? std::optional<std::uint64_t>(sweep_seed_val)
                         : std::nullopt,
          sweep_trials_set ? std::optional<int>(sweep_trials_val)
                           : std::nullopt,
          sweep_workers_set ? std::optional<int>(sweep_workers_val)
                            : std::nullopt,
          sweep_full_scale, sweep_output);
    if (diag->parsed())
      return cmd_diagnose(diag_kappa, diag_m, diag_n, diag_iteration,
                          diag_theta, diag_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
