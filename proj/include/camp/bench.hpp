#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "camp/model.hpp"
#include "camp/solvers.hpp"

namespace camp {

struct SweepConfig {
  int M = 614;
  int N = 1024;
  double rho = 0.1;
  double snr_db = 30.0;  // 1 / sigma^2 in dB
  int iterations = 100;
  std::vector<double> condition_numbers = {1.0, 10.0, 100.0, 1000.0};
  std::vector<Algorithm> algorithms = {Algorithm::Camp, Algorithm::Amp,
                                       Algorithm::OampVamp};
  int trials = 200;
  int pilot_trials = 64;
  std::vector<double> theta_grid;  // default: 30 points uniform on [0.1, 3]
  std::uint64_t master_seed = 1;
  std::string output_path;  // prefix for CSV emission; empty = in-memory only
  int workers = 1;
  bool full_scale = false;  // raises trials to 100000

  double noise_variance() const;
  std::vector<double> effective_theta_grid() const;
  int effective_trials() const;
  std::uint64_t config_hash() const;  // canonical digest of every field
};

// Flat "key = value" text config; '#' starts a comment. Unknown keys are
// errors. Lists are comma-separated.
SweepConfig parse_config_text(const std::string& text);
SweepConfig parse_config_file(const std::string& path);

struct TrialRow {
  std::string algorithm;
  double kappa = 0.0;
  double theta = 0.0;
  int trial = 0;
  double final_mse = 0.0;
  double mse_db = 0.0;
  bool diverged = false;  // non-finite state reached
};

struct AggregateRow {
  std::string algorithm;
  double kappa = 0.0;
  double theta = 0.0;
  int trials = 0;
  int diverged = 0;
  double mean_mse = 0.0;
  double mean_mse_db = 0.0;
  double stderr_db = 0.0;
};

struct ThresholdChoice {
  double theta = 0.0;
  double score = 0.0;       // pilot mean final MSE at the chosen point
  bool all_diverged = false;  // every grid point hit non-finite state
};

// One reconstruction problem instance. Instance draws depend only on
// (master seed, kappa, trial index) so that every algorithm sees identical
// signal, matrix, and noise realizations for a given trial.
struct TrialInstance {
  SensingEnsemble ensemble;
  Vector x_star;
  Measurement measurement;
};

TrialInstance make_trial_instance(const SweepConfig& config, double kappa,
                                  std::uint64_t trial_seed);

std::uint64_t instance_seed(std::uint64_t master_seed, double kappa,
                            std::uint64_t trial_index);
std::uint64_t pilot_seed(std::uint64_t master_seed, double kappa,
                         std::uint64_t pilot_index);

// Taps for the sweep: closed form for kappa > 1, equal-spectrum constant
// taps in the kappa = 1 limit.
std::vector<double> sweep_taps(double delta, double kappa, int T);

// Pilot grid search minimizing mean final MSE; ties break toward the larger
// threshold (convergence robustness).
ThresholdChoice threshold_search(const SweepConfig& config,
                                 Algorithm algorithm, double kappa,
                                 const std::vector<double>& taps);

// Pure tie-break helper: index of the minimizing score, later (larger
// threshold) entries winning ties.
std::size_t select_best_threshold(const std::vector<double>& scores);

struct SweepResult {
  std::vector<TrialRow> rows;
  std::vector<AggregateRow> aggregates;
  std::vector<ThresholdChoice> threshold_choices;  // per (kappa, algorithm)
};

SweepResult run_sweep(const SweepConfig& config);

// CSV renderings (LF line endings, '.' decimal separator, header row;
// shortest round-trip number formatting) - the byte-exact contract that the
// determinism checks compare.
std::string render_trials_csv(const std::vector<TrialRow>& rows);
std::string render_aggregate_csv(const std::vector<AggregateRow>& aggregates,
                                 std::uint64_t master_seed,
                                 std::uint64_t config_hash);
std::string emit_plot_data(const std::vector<AggregateRow>& aggregates);

// Writes the three CSV files under the config's output prefix; returns the
// paths written.
std::vector<std::string> write_sweep_outputs(const SweepConfig& config,
                                             const SweepResult& result);

// Deterministic parallel map: evaluates fn(0..n-1) on `workers` threads and
// stores each result by index, so the output is independent of scheduling.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

double snr_db_to_noise_variance(double snr_db);

}  // namespace camp
