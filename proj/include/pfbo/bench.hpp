#ifndef PFBO_BENCH_HPP
#define PFBO_BENCH_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pfbo/bo.hpp"
#include "pfbo/kalman.hpp"
#include "pfbo/ssm.hpp"

namespace pfbo::bench {

/// Where the observed series comes from: a CSV file or a simulation.
struct SeriesSource {
  std::optional<std::filesystem::path> file{};
  double tau2 = 0.012;
  std::size_t length = 500;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  SeriesSource series{};
  /// obs_var and the x_0 prior; tau2 here is ignored (it is the unknown).
  LinearGaussianModel model_base{};
  std::vector<std::size_t> particle_counts{1000, 10000};
  std::vector<double> sigma_n_grid{0.3, 1.0};
  std::vector<double> length_scale_grid{0.1, 0.2, 0.5};
  std::size_t replicates = 20;
  std::size_t iterations = 30;
  /// Bounds, sigma_f, delta, init points, convergence thresholds and the
  /// acquisition search settings. hp.sigma_n / hp.length_scale and
  /// max_iters / seed are overwritten per cell and replicate.
  BOConfig bo{};
  std::size_t normalizer_reps = 20;
  /// Replications per (m, theta) for the log-likelihood statistics table.
  std::size_t stats_replicates = 20;
  double ess_threshold_fraction = 0.5;
  std::vector<std::size_t> snapshot_iters{1, 3, 5, 10, 30, 100};
  std::vector<std::size_t> table_iters{10, 100};
  std::size_t snapshot_grid = 101;
  std::uint64_t master_seed = 20240101;
  /// 0 = one worker per hardware thread.
  std::size_t threads = 0;
  std::filesystem::path output_dir{};

  void validate() const;

  /// T = 500, m in {1e3, 1e4}, R = 20, 30 iterations,
  /// sigma_n in {0.3, 1.0} x l in {0.1, 0.2, 0.5}.
  static ExperimentConfig desk();
  /// R = 100, 100 iterations, m in {1e3, 1e4, 1e5},
  /// sigma_n in {0.2, 0.3, 0.5, 1.0} x l in {0.1, 0.2, 0.3, 0.5, 1.0}.
  static ExperimentConfig paper();
};

/// Statistics of R particle-filter log-likelihoods at one (m, theta).
struct LogLikCell {
  std::size_t particles = 0;
  double theta = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double sd = 0.0;
};

struct LogLikStats {
  std::vector<std::size_t> particle_counts;
  std::vector<double> thetas;
  /// particle-count-major: cells[i * thetas.size() + j].
  std::vector<LogLikCell> cells;
  /// Exact log-likelihood at each theta.
  std::vector<double> kalman;

  const LogLikCell& at(std::size_t m_index, std::size_t theta_index) const {
    return cells.at(m_index * thetas.size() + theta_index);
  }
};

struct LogLikStatsOptions {
  double ess_threshold_fraction = 0.5;
  /// When true every replicate reuses the first replicate's stream.
  bool reuse_first_seed = false;
  std::size_t threads = 0;
};

LogLikStats loglik_stats(const TimeSeries& series, const LinearGaussianModel& model_base,
                         const std::vector<std::size_t>& particle_counts, const std::vector<double>& thetas,
                         std::size_t replicates, std::uint64_t seed, const LogLikStatsOptions& options = {});

/// Per-iteration mean squared errors of one hyperparameter cell, i = 0..budget.
struct MSECurve {
  std::size_t particles = 0;
  double sigma_n = 0.0;
  double length_scale = 0.0;
  std::vector<double> mse_x;
  std::vector<double> mse_f;

  friend bool operator==(const MSECurve&, const MSECurve&) = default;
};

using MSECurves = std::vector<MSECurve>;

/// One BO run and the exact log-likelihood of each incumbent.
struct ReplicateResult {
  BOTrace trace;
  /// l_KF(theta_hat_i), i = 0..budget.
  std::vector<double> incumbent_loglik;
};

struct CellResult {
  std::size_t particles = 0;
  double sigma_n = 0.0;
  double length_scale = 0.0;
  Normalizer normalizer{};
  std::vector<ReplicateResult> replicates;
};

struct ExperimentResult {
  ExperimentConfig config{};
  MLEResult mle{};
  std::optional<LogLikStats> stats{};
  /// Normalizer per particle count, shared by all cells with that count.
  std::vector<Normalizer> normalizers;
  std::vector<CellResult> cells;
  MSECurves curves;
};

/// MSE(x_i) and MSE(l_i) from replicate traces against theta*.
MSECurve mse_curve(const CellResult& cell, const MLEResult& mle);

TimeSeries load_or_simulate(const ExperimentConfig& cfg);

/// Runs every (m, sigma_n, l) cell for every replicate, then aggregates the
/// MSE curves. Set `with_stats` to also compute the log-likelihood table.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool with_stats = true);

/// Files produced by export_tables, relative to the output directory.
struct ExportFiles {
  static constexpr const char* loglik_stats = "loglik_stats.csv";
  static constexpr const char* mse_table = "mse_table.csv";
  static constexpr const char* mse_curves = "mse_curves.csv";
  static constexpr const char* posterior_snapshots = "posterior_snapshots.csv";
  static constexpr const char* convergence = "convergence.csv";
  static constexpr const char* traces = "traces.csv";
};

/// Writes the log-likelihood table, the MSE table at selected iterations,
/// the per-iteration MSE curves, GP posterior snapshots, convergence
/// increments and the raw traces. An empty result gives header-only files.
void export_tables(const ExperimentResult& result, const std::filesystem::path& dir);

/// Parses a file written by export_tables back into curves.
MSECurves read_mse_curves(const std::filesystem::path& path);

/// Band label for a log10 MSE relative to the minimum of its group:
/// "min", "within_0.30", "above_1.0" or "".
std::string mse_band(double log10_value, double log10_min);

}  // namespace pfbo::bench

#endif  // PFBO_BENCH_HPP
