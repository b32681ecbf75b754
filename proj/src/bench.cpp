#include "camp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <thread>

#include "camp/diagnostics.hpp"
#include "camp/spectral.hpp"

namespace camp {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value for '" + key + "'");
  }
}

long long parse_int(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer value for '" + key + "'");
  }
}

struct TrialOutcome {
  double final_mse = 0.0;
  bool diverged = false;
};

TrialOutcome execute_trial(const SweepConfig& config, Algorithm algorithm,
                           double kappa, const std::vector<double>& taps,
                           double theta, std::uint64_t seed) {
  TrialInstance instance = make_trial_instance(config, kappa, seed);
  SolverConfig sc;
  sc.algorithm = algorithm;
  sc.iterations = config.iterations;
  sc.taps = taps;
  sc.denoiser.theta = theta;
  sc.noise_variance = config.noise_variance();
  SolverTrajectory traj =
      run_solver(instance.ensemble, instance.measurement, sc);
  TrialOutcome out;
  out.final_mse = traj.final_mse(instance.x_star);
  out.diverged = traj.diverged_at.has_value();
  return out;
}

}  // namespace

double snr_db_to_noise_variance(double snr_db) {
  return std::pow(10.0, -snr_db / 10.0);
}

double SweepConfig::noise_variance() const {
  return snr_db_to_noise_variance(snr_db);
}

std::vector<double> SweepConfig::effective_theta_grid() const {
  if (!theta_grid.empty()) return theta_grid;
  std::vector<double> grid(30);
  for (int i = 0; i < 30; ++i) grid[i] = 0.1 + (3.0 - 0.1) * i / 29.0;
  return grid;
}

int SweepConfig::effective_trials() const {
  return full_scale ? 100000 : trials;
}

std::uint64_t SweepConfig::config_hash() const {
  std::string canon;
  canon += "m=" + std::to_string(M);
  canon += ";n=" + std::to_string(N);
  canon += ";rho=" + format_double(rho);
  canon += ";snr_db=" + format_double(snr_db);
  canon += ";iterations=" + std::to_string(iterations);
  canon += ";kappas=";
  for (double k : condition_numbers) canon += format_double(k) + ",";
  canon += ";algorithms=";
  for (Algorithm a : algorithms) canon += algorithm_name(a) + ",";
  canon += ";trials=" + std::to_string(effective_trials());
  canon += ";pilot=" + std::to_string(pilot_trials);
  canon += ";grid=";
  for (double t : effective_theta_grid()) canon += format_double(t) + ",";
  canon += ";seed=" + std::to_string(master_seed);
  return fnv1a64(canon);
}

SweepConfig parse_config_text(const std::string& text) {
  SweepConfig config;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "m") {
      config.M = static_cast<int>(parse_int(value, key));
    } else if (key == "n") {
      config.N = static_cast<int>(parse_int(value, key));
    } else if (key == "rho") {
      config.rho = parse_double(value, key);
    } else if (key == "snr_db") {
      config.snr_db = parse_double(value, key);
    } else if (key == "iterations") {
      config.iterations = static_cast<int>(parse_int(value, key));
    } else if (key == "condition_numbers") {
      config.condition_numbers.clear();
      for (const auto& item : split_list(value))
        config.condition_numbers.push_back(parse_double(item, key));
    } else if (key == "algorithms") {
      config.algorithms.clear();
      for (const auto& item : split_list(value)) {
        auto alg = algorithm_from_name(item);
        if (!alg)
          throw std::invalid_argument("config: unknown algorithm '" + item +
                                      "'");
        config.algorithms.push_back(*alg);
      }
    } else if (key == "trials") {
      config.trials = static_cast<int>(parse_int(value, key));
    } else if (key == "pilot_trials") {
      config.pilot_trials = static_cast<int>(parse_int(value, key));
    } else if (key == "theta_grid") {
      config.theta_grid.clear();
      for (const auto& item : split_list(value))
        config.theta_grid.push_back(parse_double(item, key));
    } else if (key == "master_seed") {
      config.master_seed = static_cast<std::uint64_t>(parse_int(value, key));
    } else if (key == "output_path") {
      config.output_path = value;
    } else if (key == "workers") {
      config.workers = static_cast<int>(parse_int(value, key));
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (config.trials < 1) throw std::invalid_argument("config: trials >= 1");
  if (!is_power_of_two(config.N))
    throw std::invalid_argument("config: n must be a power of two");
  if (config.effective_theta_grid().empty())
    throw std::invalid_argument("config: theta_grid must be nonempty");
  return config;
}

SweepConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::uint64_t instance_seed(std::uint64_t master_seed, double kappa,
                            std::uint64_t trial_index) {
  // Algorithms are deliberately absent: every algorithm must see the same
  // instance for a given (kappa, trial) so comparisons are paired.
  return derive_seed(master_seed, "instance", double_bits(kappa), trial_index);
}

std::uint64_t pilot_seed(std::uint64_t master_seed, double kappa,
                         std::uint64_t pilot_index) {
  return derive_seed(master_seed, "pilot", double_bits(kappa), pilot_index);
}

TrialInstance make_trial_instance(const SweepConfig& config, double kappa,
                                  std::uint64_t trial_seed) {
  TrialInstance inst;
  Vector sigma = geometric_singular_values(config.M, config.N, kappa);
  Rng rows_rng(derive_seed(trial_seed, "rows"));
  inst.ensemble =
      sample_partial_hadamard(config.M, config.N, sigma, rows_rng);
  Rng signal_rng(derive_seed(trial_seed, "signal"));
  inst.x_star = sample_signal(SignalPrior{config.rho}, config.N, signal_rng);
  Rng noise_rng(derive_seed(trial_seed, "noise"));
  inst.measurement = measure(inst.ensemble, inst.x_star,
                             config.noise_variance(), noise_rng);
  return inst;
}

std::vector<double> sweep_taps(double delta, double kappa, int T) {
  if (kappa == 1.0) return taps_equal_spectrum(delta, T);
  return taps_geometric_closed_form(delta, kappa, T);
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= n) break;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  int count = std::min(workers, n);
  pool.reserve(count);
  for (int w = 0; w < count; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

std::size_t select_best_threshold(const std::vector<double>& scores) {
  if (scores.empty())
    throw std::invalid_argument("select_best_threshold: empty scores");
  std::size_t best = 0;
  double best_score = scores[0];
  if (std::isnan(best_score))
    best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < scores.size(); ++i) {
    double s = scores[i];
    if (std::isnan(s)) s = std::numeric_limits<double>::infinity();
    // '<=' so that equal scores prefer the later (larger) threshold.
    if (s <= best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

ThresholdChoice threshold_search(const SweepConfig& config,
                                 Algorithm algorithm, double kappa,
                                 const std::vector<double>& taps) {
  const auto grid = config.effective_theta_grid();
  const int pilots = config.pilot_trials;
  std::vector<double> scores(grid.size(), 0.0);
  std::vector<int> diverged_counts(grid.size(), 0);

  const int total = static_cast<int>(grid.size()) * pilots;
  std::vector<double> mses(total, 0.0);
  std::vector<char> divs(total, 0);
  parallel_for(total, config.workers, [&](int idx) {
    int gi = idx / pilots;
    int pi = idx % pilots;
    TrialOutcome out = execute_trial(config, algorithm, kappa, taps, grid[gi],
                                     pilot_seed(config.master_seed, kappa,
                                                static_cast<std::uint64_t>(pi)));
    mses[idx] = out.final_mse;
    divs[idx] = out.diverged ? 1 : 0;
  });
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    double acc = 0.0;
    int dcount = 0;
    for (int pi = 0; pi < pilots; ++pi) {
      int idx = static_cast<int>(gi) * pilots + pi;
      acc += mses[idx];
      dcount += divs[idx];
    }
    scores[gi] = acc / pilots;
    diverged_counts[gi] = dcount;
  }

  std::size_t best = select_best_threshold(scores);
  ThresholdChoice choice;
  choice.theta = grid[best];
  choice.score = scores[best];
  choice.all_diverged = true;
  for (std::size_t gi = 0; gi < grid.size(); ++gi)
    if (diverged_counts[gi] < pilots) choice.all_diverged = false;
  return choice;
}

SweepResult run_sweep(const SweepConfig& config) {
  SweepResult result;
  const int trials = config.effective_trials();

  for (double kappa : config.condition_numbers) {
    const double delta = static_cast<double>(config.M) / config.N;
    std::vector<double> taps = sweep_taps(delta, kappa, config.iterations);
    for (Algorithm algorithm : config.algorithms) {
      ThresholdChoice choice =
          threshold_search(config, algorithm, kappa, taps);
      result.threshold_choices.push_back(choice);

      std::vector<TrialOutcome> outcomes(trials);
      parallel_for(trials, config.workers, [&](int trial) {
        outcomes[trial] = execute_trial(
            config, algorithm, kappa, taps, choice.theta,
            instance_seed(config.master_seed, kappa,
                          static_cast<std::uint64_t>(trial)));
      });

      AggregateRow agg;
      agg.algorithm = algorithm_name(algorithm);
      agg.kappa = kappa;
      agg.theta = choice.theta;
      agg.trials = trials;
      double sum = 0.0;
      for (int trial = 0; trial < trials; ++trial) {
        const auto& out = outcomes[trial];
        TrialRow row;
        row.algorithm = agg.algorithm;
        row.kappa = kappa;
        row.theta = choice.theta;
        row.trial = trial;
        row.final_mse = out.final_mse;
        row.mse_db = mse_db(out.final_mse);
        row.diverged = out.diverged;
        result.rows.push_back(std::move(row));
        sum += out.final_mse;
        if (out.diverged) ++agg.diverged;
      }
      agg.mean_mse = sum / trials;
      agg.mean_mse_db = mse_db(agg.mean_mse);
      double var = 0.0;
      for (int trial = 0; trial < trials; ++trial) {
        double d = outcomes[trial].final_mse - agg.mean_mse;
        var += d * d;
      }
      double se = trials > 1 ? std::sqrt(var / (static_cast<double>(trials) *
                                                (trials - 1)))
                             : 0.0;
      agg.stderr_db = agg.mean_mse > 0.0
                          ? 10.0 / std::log(10.0) * se / agg.mean_mse
                          : 0.0;
      result.aggregates.push_back(std::move(agg));
    }
  }
  return result;
}

std::string render_trials_csv(const std::vector<TrialRow>& rows) {
  std::string out = "algorithm,kappa,theta,trial,final_mse,mse_db\n";
  for (const auto& r : rows) {
    out += r.algorithm;
    out += ',';
    out += format_double(r.kappa);
    out += ',';
    out += format_double(r.theta);
    out += ',';
    out += std::to_string(r.trial);
    out += ',';
    out += format_double(r.final_mse);
    out += ',';
    out += format_double(r.mse_db);
    out += '\n';
  }
  return out;
}

std::string render_aggregate_csv(const std::vector<AggregateRow>& aggregates,
                                 std::uint64_t master_seed,
                                 std::uint64_t config_hash) {
  std::string out =
      "algorithm,kappa,theta,trials,diverged,mean_mse,mean_mse_db,stderr_db,"
      "master_seed,config_hash\n";
  for (const auto& a : aggregates) {
    out += a.algorithm;
    out += ',';
    out += format_double(a.kappa);
    out += ',';
    out += format_double(a.theta);
    out += ',';
    out += std::to_string(a.trials);
    out += ',';
    out += std::to_string(a.diverged);
    out += ',';
    out += format_double(a.mean_mse);
    out += ',';
    out += format_double(a.mean_mse_db);
    out += ',';
    out += format_double(a.stderr_db);
    out += ',';
    out += std::to_string(master_seed);
    out += ',';
    out += std::to_string(config_hash);
    out += '\n';
  }
  return out;
}

std::string emit_plot_data(const std::vector<AggregateRow>& aggregates) {
  std::string out = "algorithm,kappa,mean_mse_db,stderr_db\n";
  for (const auto& a : aggregates) {
    out += a.algorithm;
    out += ',';
    out += format_double(a.kappa);
    out += ',';
    out += format_double(a.mean_mse_db);
    out += ',';
    out += format_double(a.stderr_db);
    out += '\n';
  }
  return out;
}

std::vector<std::string> write_sweep_outputs(const SweepConfig& config,
                                             const SweepResult& result) {
  std::vector<std::string> paths;
  if (config.output_path.empty()) return paths;
  auto write = [&](const std::string& suffix, const std::string& content) {
    std::string path = config.output_path + suffix;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    paths.push_back(path);
  };
  write("_trials.csv", render_trials_csv(result.rows));
  write("_aggregate.csv", render_aggregate_csv(result.aggregates,
                                               config.master_seed,
                                               config.config_hash()));
  write("_plot.csv", emit_plot_data(result.aggregates));
  return paths;
}

}  // namespace camp
