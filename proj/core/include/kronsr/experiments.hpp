#pragma once

// Synthetic instances, metrics and Monte Carlo orchestration.

#include <kronsr/irs_channel.hpp>
#include <kronsr/solvers.hpp>
#include <kronsr/types.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace kronsr {

// ---------------------------------------------------------------------------
// Synthetic data: H_1 is m x N, the remaining factors have fixed row counts.

struct SyntheticConfig {
  Index N = 15;
  Index m = 12;
  std::vector<Index> fixed_rows{12, 15};  // rows of H_2 .. H_I
  Index S = 3;                            // nonzeros per factor
  double snr_db = 20.0;

  Index order() const { return 1 + static_cast<Index>(fixed_rows.size()); }
  std::vector<Index> row_dims() const;
  void validate() const;
};

struct SyntheticInstance {
  KroneckerDictionary<double> dict;
  FactorChain<double> x_true_factors;
  Vec<double> x_true;
  Vec<double> y_clean;
  Vec<double> y_noisy;
  double sigma2 = 0.0;           // per-entry noise variance ||n||^2 / M
  std::uint64_t hash = 0;        // FNV-1a over dictionary, x and y_noisy

  std::vector<Index> true_support() const;
};

/// Noise is rescaled on each instance so that 10 log10(||y_clean||^2/||n||^2)
/// equals snr_db exactly.
SyntheticInstance gen_synthetic(const SyntheticConfig& cfg, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Metrics

template <typename T>
double rmse(const Vec<T>& x_hat, const Vec<T>& x_true);

/// Jaccard index of two index sets; two empty sets give 1.
double srr(std::vector<Index> support_hat, std::vector<Index> support_true);

/// Mean over configurations of ||H_k - H_k_est||_F / ||H_k||_F.
double channel_rmse(const std::vector<DenseMatrix>& true_channels,
                    const std::vector<DenseMatrix>& est_channels);

inline constexpr double kDbFloor = -300.0;

/// 10 log10(v), clamped below at kDbFloor.
double power_db(double squared_norm);

struct DenoiseGain {
  double before_db = 0.0;  // level of y_noisy - y_clean
  double after_db = 0.0;   // level of y_reassembled - y_clean
};

/// Noise levels before and after Kronecker reassembly, in dB of the squared
/// norm of the residual noise.
template <typename T>
DenoiseGain denoise_gain(const Vec<T>& y_noisy, const Vec<T>& y_reassembled,
                         const Vec<T>& y_clean);

/// Reassembles y from its rank-one decomposition and measures the gain.
template <typename T>
DenoiseGain measure_denoise(const Vec<T>& y_noisy, const Vec<T>& y_clean,
                            const std::vector<Index>& row_dims);

// ---------------------------------------------------------------------------
// Trials and sweeps

enum class Algorithm { cSBL, OMP, AM_KroSBL, SVD_KroSBL, dOMP, dSBL };
enum class Scenario { Synthetic, Channel, DenoiseTable };
enum class SweepVariable { Snr, M, S };

std::string to_string(Algorithm a);
std::string to_string(Scenario s);
std::string to_string(SweepVariable v);
/// Throws InvalidInput naming the offending value.
Algorithm parse_algorithm(const std::string& name);
Scenario parse_scenario(const std::string& name);
SweepVariable parse_sweep_variable(const std::string& name);
const std::vector<Algorithm>& all_algorithms();

struct GridPoint {
  double snr_db = 20.0;
  Index m = 12;
  Index S = 3;
};

struct TrialRecord {
  std::string scenario;
  std::string algorithm;
  GridPoint point;
  std::size_t grid_index = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t instance_hash = 0;
  double rmse = 0.0;
  double srr = 0.0;
  std::optional<double> ser;
  std::optional<double> denoise_before_db;
  std::optional<double> denoise_after_db;
  double wall_time_s = 0.0;
  bool failed = false;
  std::string error;

  std::string status() const { return failed ? "failed" : "ok"; }
};

struct ChannelScenarioConfig {
  SystemGeometry geometry;
  ProtocolConfig protocol;
  std::uint64_t ser_symbols = 100000;  // 0 disables the SER evaluation
};

struct SweepSpec {
  Scenario scenario = Scenario::Synthetic;
  std::vector<GridPoint> grid;
  std::vector<Algorithm> algorithms;
  int trials = 1;
  std::uint64_t base_seed = 1;
  int parallel = 1;
  SolverConfig solver;
  SyntheticConfig synthetic;  // N and fixed_rows; m, S and snr come from the grid
  ChannelScenarioConfig channel;
  // Called after every finished (grid point, trial) task; serialized.
  std::function<void(std::size_t done, std::size_t total)> progress;

  void validate() const;
};

/// Runs all algorithms of one synthetic trial on the instance derived from
/// `seed` (paired design).
std::vector<TrialRecord> run_synthetic_trial(const SweepSpec& spec, const GridPoint& point,
                                             std::uint64_t seed);

/// Same for the channel scenario; `point.m` and `point.S` are ignored.
std::vector<TrialRecord> run_channel_trial(const SweepSpec& spec, const GridPoint& point,
                                           std::uint64_t seed);

/// One decomposition-only record with the before/after noise levels.
TrialRecord run_denoise_trial(const SweepSpec& spec, const GridPoint& point, std::uint64_t seed);

/// seed = base_seed + trial for every grid point. Records are sorted by grid
/// point, trial and the order of spec.algorithms.
std::vector<TrialRecord> run_sweep(const SweepSpec& spec);

/// Reference value sets: SNR {5..30 step 5} at m=12, S=3; m {2..14 even} at
/// 20 dB, S=3; S {2..6} at m=12, 20 dB.
std::vector<GridPoint> default_grid(SweepVariable v);

struct MetricSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct SummaryRow {
  std::string scenario;
  std::string algorithm;
  GridPoint point;
  std::size_t grid_index = 0;
  std::size_t trials = 0;
  std::size_t failed = 0;
  MetricSummary rmse, srr, ser, denoise_before_db, denoise_after_db;
  double median_wall_time_s = 0.0;
};

MetricSummary summarize(const std::vector<double>& values);

/// Groups by (grid point, algorithm); failed records only count in `failed`.
std::vector<SummaryRow> aggregate(const std::vector<TrialRecord>& records);

}  // namespace kronsr
