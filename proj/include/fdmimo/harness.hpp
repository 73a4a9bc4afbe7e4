#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdmimo/baselines.hpp"

namespace fdmimo {

/// Scalar description of a symmetric link, as written in experiment files.
/// Distortion and noise levels are linear here.
struct LinkParams {
  int K = 4;
  int antennas = 2;  // N = M
  int streams = 1;
  double power = 1.0;
  double sigma2 = 1e-3;
  double kappa = 1e-3;
  double beta = 1e-3;
  double zeta = 0.0316227766016838;
  PerDirection<double> omega{1.0, 1.0};
  int max_iters = 100;
  double rel_tol = 1e-6;

  SystemConfig config() const;
};

enum class CsiErrorMode { kNone, kInterior, kBoundary };

struct ExperimentSpec {
  LinkParams link;
  ChannelStats channel;
  std::string sweep_param = "kappa_db";  // kappa_db | zeta_db | sigma2_db | pmax | K | M
  std::vector<double> sweep_values;
  std::vector<std::string> algorithms;
  DesignObjective design_objective = DesignObjective::kMse;
  CsiErrorMode csi_error = CsiErrorMode::kInterior;
  int n_trials = 100;
  std::uint64_t seed = 1;
  std::string output = "results";
  CuttingSetOptions cutting_set;
  std::uint64_t hash = 0;  // of the canonical JSON text

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses an experiment file. Any linear field accepts "-30dB" strings.
ExperimentSpec parse_spec(const std::string& json_text);
ExperimentSpec load_spec(const std::string& path);

inline const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names{"altqcp", "wmmse",   "hd",       "kappa0",     "sc",
                                              "pth_inf", "pth_high", "pth_low", "cutting_set"};
  return names;
}

/// Link parameters for one point of the sweep.
LinkParams apply_sweep(const LinkParams& base, const std::string& param, double value);

/// One long-format result row. `iteration` < 0 marks a scalar metric.
struct ResultRow {
  std::string sweep_param;
  double sweep_value = 0.0;
  int trial = 0;
  std::string algorithm;
  std::uint64_t channel_hash = 0;
  std::string metric;
  int iteration = -1;
  double value = 0.0;
};

struct TimingRow {
  double sweep_value = 0.0;
  int trial = 0;
  std::string algorithm;
  double seconds = 0.0;
};

struct ExperimentResults {
  std::vector<ResultRow> rows;  // canonical order: sweep value, trial, algorithm list order
  std::vector<TimingRow> timing;
};

/// Runs every (sweep value, trial) on `threads` workers. Output is
/// independent of the thread count.
ExperimentResults run_experiment(const ExperimentSpec& spec, int threads = 1);

/// Results for one trial on one sweep point; exposed for tests.
ExperimentResults run_trial(const ExperimentSpec& spec, double sweep_value, int trial);

void write_results_csv(std::ostream& out, const ExperimentSpec& spec,
                       const std::vector<ResultRow>& rows);
void write_timing_csv(std::ostream& out, const ExperimentSpec& spec,
                      const std::vector<TimingRow>& rows);

/// Generic CSV table: '#' comment lines skipped, first line is the header.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws ConfigError when missing
};

Table read_csv(std::istream& in);
Table read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const Table& table);

/// Mean, sample standard deviation and count of `value` per group.
Table summarize(const Table& results, const std::vector<std::string>& by);

inline const std::vector<std::string>& known_figures() {
  static const std::vector<std::string> names{"convergence",  "wcmse_vs_kappa", "wcmse_vs_zeta",
                                              "wcmse_vs_noise", "sr_vs_kappa",  "sr_vs_noise",
                                              "sr_vs_power"};
  return names;
}

/// Figure data from a results table: x/series/y, or the convergence layout
/// (iteration, algorithm, kappa_db, objective_mean, objective_min).
Table plot_data(const Table& results, const std::string& figure);

/// Output directory: explicit flag, else FDMIMO_OUT_DIR, else the fallback.
std::string resolve_output_dir(const std::optional<std::string>& flag, const std::string& fallback);

/// Fixed-point rendering used for sweep values and dB quantities.
std::string format_fixed(double v);
/// Round-trippable rendering used for metric values.
std::string format_exact(double v);

}  // namespace fdmimo
