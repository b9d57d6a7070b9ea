#include <kronsr/errors.hpp>
#include <kronsr/experiments.hpp>
#include <kronsr/kron_linalg.hpp>
#include <kronsr/ser.hpp>

#include "fnv.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace kronsr {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Keeps the SER symbol stream independent of the instance stream while still
// shared by all algorithms of a trial.
constexpr std::uint64_t kSerStream = 0x9e3779b97f4a7c15ull;

bool is_centralized(Algorithm a) {
  return a == Algorithm::cSBL || a == Algorithm::OMP;
}

bool is_decomposition(Algorithm a) { return a == Algorithm::dOMP || a == Algorithm::dSBL; }

TrialRecord base_record(const SweepSpec& spec, const GridPoint& point, std::uint64_t seed) {
  TrialRecord r;
  r.scenario = to_string(spec.scenario);
  r.point = point;
  r.seed = seed;
  r.trial = static_cast<int>(seed - spec.base_seed);
  return r;
}

void mark_failed(TrialRecord& r, const std::string& what) {
  r.failed = true;
  r.error = what;
  r.rmse = kNaN;
  r.srr = kNaN;
  r.ser.reset();
  r.denoise_before_db.reset();
  r.denoise_after_db.reset();
}

template <typename T, typename Fn>
SparseEstimate<T> timed(double& seconds, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  SparseEstimate<T> est = fn();
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

template <typename T>
SparseEstimate<T> solve(Algorithm a, const KroneckerDictionary<T>& dict, const Mat<T>* full,
                        const Vec<T>& y, SolverConfig cfg, std::optional<int> sparsity_full,
                        std::optional<int> sparsity_factor, double& seconds) {
  switch (a) {
    case Algorithm::cSBL:
      return timed<T>(seconds, [&] { return sbl(*full, y, cfg); });
    case Algorithm::OMP:
      if (sparsity_full) {
        cfg.omp_sparsity = sparsity_full;
        cfg.omp_residual_tol.reset();
      } else if (!cfg.omp_sparsity && !cfg.omp_residual_tol) {
        const double yn = y.norm();
        cfg.omp_residual_tol =
            yn > 0.0 ? 1.1 * std::sqrt(static_cast<double>(y.size()) * cfg.noise_variance) / yn : 0.0;
      }
      return timed<T>(seconds, [&] { return omp(*full, y, cfg); });
    case Algorithm::AM_KroSBL:
      return timed<T>(seconds, [&] { return krosbl(dict, y, cfg, KroMode::AM); });
    case Algorithm::SVD_KroSBL:
      return timed<T>(seconds, [&] { return krosbl(dict, y, cfg, KroMode::SVD); });
    case Algorithm::dOMP:
      if (sparsity_factor) {
        cfg.omp_sparsity = sparsity_factor;
        cfg.omp_residual_tol.reset();
      }
      return timed<T>(seconds, [&] { return dsr(dict, y, InnerSolver::OMP, cfg); });
    case Algorithm::dSBL:
      return timed<T>(seconds, [&] { return dsr(dict, y, InnerSolver::SBL, cfg); });
  }
  throw InvalidInput("unknown algorithm");
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::cSBL: return "cSBL";
    case Algorithm::OMP: return "OMP";
    case Algorithm::AM_KroSBL: return "AM-KroSBL";
    case Algorithm::SVD_KroSBL: return "SVD-KroSBL";
    case Algorithm::dOMP: return "dOMP";
    case Algorithm::dSBL: return "dSBL";
  }
  return "?";
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Synthetic: return "synthetic";
    case Scenario::Channel: return "channel";
    case Scenario::DenoiseTable: return "denoise-table";
  }
  return "?";
}

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::Snr: return "snr";
    case SweepVariable::M: return "m";
    case SweepVariable::S: return "S";
  }
  return "?";
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> all{Algorithm::cSBL,       Algorithm::OMP,
                                          Algorithm::AM_KroSBL,  Algorithm::SVD_KroSBL,
                                          Algorithm::dOMP,       Algorithm::dSBL};
  return all;
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : all_algorithms())
    if (to_string(a) == name) return a;
  throw InvalidInput("unknown algorithm '" + name +
                     "' (expected cSBL, OMP, AM-KroSBL, SVD-KroSBL, dOMP or dSBL)");
}

Scenario parse_scenario(const std::string& name) {
  for (Scenario s : {Scenario::Synthetic, Scenario::Channel, Scenario::DenoiseTable})
    if (to_string(s) == name) return s;
  throw InvalidInput("unknown scenario '" + name + "' (expected synthetic, channel or denoise-table)");
}

SweepVariable parse_sweep_variable(const std::string& name) {
  for (SweepVariable v : {SweepVariable::Snr, SweepVariable::M, SweepVariable::S})
    if (to_string(v) == name) return v;
  throw InvalidInput("unknown sweep variable '" + name + "' (expected snr, m or S)");
}

void SweepSpec::validate() const {
  if (grid.empty()) throw InvalidInput("sweep: empty grid");
  if (trials < 1) throw InvalidInput("sweep: trials must be >= 1");
  if (parallel < 1) throw InvalidInput("sweep: parallelism must be >= 1");
  if (scenario != Scenario::DenoiseTable && algorithms.empty())
    throw InvalidInput("sweep: no algorithms selected");
  kronsr::validate(solver);
  for (const auto& p : grid)
    if (!std::isfinite(p.snr_db)) throw InvalidInput("sweep: non-finite SNR in grid");
  if (scenario == Scenario::Channel) {
    channel.geometry.validate();
    channel.protocol.validate();
  } else {
    for (const auto& p : grid) {
      SyntheticConfig c = synthetic;
      c.m = p.m;
      c.S = p.S;
      c.snr_db = p.snr_db;
      c.validate();
    }
  }
}

std::vector<TrialRecord> run_synthetic_trial(const SweepSpec& spec, const GridPoint& point,
                                             std::uint64_t seed) {
  std::vector<TrialRecord> out;
  SyntheticConfig cfg = spec.synthetic;
  cfg.m = point.m;
  cfg.S = point.S;
  cfg.snr_db = point.snr_db;

  SyntheticInstance inst;
  try {
    std::mt19937_64 rng(seed);
    inst = gen_synthetic(cfg, rng);
  } catch (const std::exception& e) {
    for (Algorithm a : spec.algorithms) {
      TrialRecord r = base_record(spec, point, seed);
      r.algorithm = to_string(a);
      mark_failed(r, e.what());
      out.push_back(std::move(r));
    }
    return out;
  }

  const auto truth = inst.true_support();
  std::optional<Mat<double>> full;
  std::optional<DenoiseGain> denoise;
  const int order = static_cast<int>(inst.dict.size());
  const int s_full = static_cast<int>(std::lround(std::pow(static_cast<double>(cfg.S), order)));

  for (Algorithm a : spec.algorithms) {
    TrialRecord r = base_record(spec, point, seed);
    r.algorithm = to_string(a);
    r.instance_hash = inst.hash;
    try {
      if (is_centralized(a) && !full) full = materialize(inst.dict);
      SolverConfig sc = spec.solver;
      sc.noise_variance = inst.sigma2;
      const auto est = solve<double>(a, inst.dict, full ? &*full : nullptr, inst.y_noisy, sc,
                                     s_full, static_cast<int>(cfg.S), r.wall_time_s);
      r.rmse = rmse(est.x_full, inst.x_true);
      r.srr = srr(est.support, truth);
      if (is_decomposition(a)) {
        if (!denoise) denoise = measure_denoise(inst.y_noisy, inst.y_clean, inst.dict.row_dims());
        r.denoise_before_db = denoise->before_db;
        r.denoise_after_db = denoise->after_db;
      }
      if (!std::isfinite(r.rmse)) throw NumericalError(r.algorithm + ": non-finite estimate", 0);
    } catch (const std::exception& e) {
      mark_failed(r, e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TrialRecord> run_channel_trial(const SweepSpec& spec, const GridPoint& point,
                                           std::uint64_t seed) {
  std::vector<TrialRecord> out;
  const auto& geo = spec.channel.geometry;

  ChannelInstance inst;
  DenseVector x_true;
  std::vector<DenseMatrix> h_true;
  std::uint64_t hash = 0;
  try {
    std::mt19937_64 rng(seed);
    inst = simulate_channel_instance(geo, spec.channel.protocol, point.snr_db, rng);
    x_true = ground_truth_factors(inst.channel, geo).assembled();
    h_true = true_cascaded(inst.channel, inst.protocol);
    detail::Fnv1a h;
    h.matrix(inst.protocol.x);
    h.matrix(inst.protocol.theta);
    h.matrix(inst.model.y_tilde);
    hash = h.h;
  } catch (const std::exception& e) {
    for (Algorithm a : spec.algorithms) {
      TrialRecord r = base_record(spec, point, seed);
      r.algorithm = to_string(a);
      mark_failed(r, e.what());
      out.push_back(std::move(r));
    }
    return out;
  }

  std::vector<Index> truth;
  for (Index i = 0; i < x_true.size(); ++i)
    if (x_true[i] != cdouble(0.0)) truth.push_back(i);

  const auto dict = inst.model.dictionary();
  std::optional<DenseMatrix> full;
  for (Algorithm a : spec.algorithms) {
    TrialRecord r = base_record(spec, point, seed);
    r.algorithm = to_string(a);
    r.instance_hash = hash;
    try {
      if (is_centralized(a) && !full) full = materialize(dict);
      SolverConfig sc = spec.solver;
      sc.noise_variance = inst.model.sigma2;
      const auto est = solve<cdouble>(a, dict, full ? &*full : nullptr, inst.model.y_tilde, sc,
                                      std::nullopt, std::nullopt, r.wall_time_s);
      const auto h_est = reconstruct_cascaded(est.x_full, geo, inst.protocol);
      r.rmse = channel_rmse(h_true, h_est);
      r.srr = srr(est.support, truth);
      if (spec.channel.ser_symbols > 0) {
        std::mt19937_64 ser_rng(seed ^ kSerStream);
        r.ser = simulate_ser(h_true, h_est, point.snr_db, spec.channel.ser_symbols, ser_rng).ser;
      }
      if (!std::isfinite(r.rmse)) throw NumericalError(r.algorithm + ": non-finite estimate", 0);
    } catch (const std::exception& e) {
      mark_failed(r, e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

TrialRecord run_denoise_trial(const SweepSpec& spec, const GridPoint& point, std::uint64_t seed) {
  TrialRecord r = base_record(spec, point, seed);
  r.algorithm = "decomposition";
  r.rmse = kNaN;
  r.srr = kNaN;
  try {
    SyntheticConfig cfg = spec.synthetic;
    cfg.m = point.m;
    cfg.S = point.S;
    cfg.snr_db = point.snr_db;
    std::mt19937_64 rng(seed);
    const SyntheticInstance inst = gen_synthetic(cfg, rng);
    r.instance_hash = inst.hash;
    const auto t0 = std::chrono::steady_clock::now();
    const DenoiseGain g = measure_denoise(inst.y_noisy, inst.y_clean, inst.dict.row_dims());
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.denoise_before_db = g.before_db;
    r.denoise_after_db = g.after_db;
  } catch (const std::exception& e) {
    mark_failed(r, e.what());
  }
  return r;
}

std::vector<TrialRecord> run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::size_t trials = static_cast<std::size_t>(spec.trials);
  const std::size_t total = spec.grid.size() * trials;
  std::vector<std::vector<TrialRecord>> results(total);

  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  std::size_t done = 0;

  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= total) return;
      const std::size_t g = task / trials;
      const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(task % trials);
      const GridPoint& p = spec.grid[g];
      std::vector<TrialRecord> recs;
      switch (spec.scenario) {
        case Scenario::Synthetic: recs = run_synthetic_trial(spec, p, seed); break;
        case Scenario::Channel: recs = run_channel_trial(spec, p, seed); break;
        case Scenario::DenoiseTable: recs.push_back(run_denoise_trial(spec, p, seed)); break;
      }
      for (auto& r : recs) r.grid_index = g;
      results[task] = std::move(recs);
      if (spec.progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        spec.progress(++done, total);
      }
    }
  };

  const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(spec.parallel), total);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Task order is already (grid point, trial); algorithms keep spec order.
  std::vector<TrialRecord> flat;
  for (auto& v : results)
    for (auto& r : v) flat.push_back(std::move(r));
  return flat;
}

std::vector<GridPoint> default_grid(SweepVariable v) {
  std::vector<GridPoint> g;
  switch (v) {
    case SweepVariable::Snr:
      for (int s = 5; s <= 30; s += 5) g.push_back({static_cast<double>(s), 12, 3});
      break;
    case SweepVariable::M:
      for (Index m = 2; m <= 14; m += 2) g.push_back({20.0, m, 3});
      break;
    case SweepVariable::S:
      for (Index s = 2; s <= 6; ++s) g.push_back({20.0, 12, s});
      break;
  }
  return g;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.n = values.size();
  if (values.empty()) {
    s.mean = kNaN;
    s.stderr_ = kNaN;
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(s.n - 1) / static_cast<double>(s.n));
  }
  return s;
}

std::vector<SummaryRow> aggregate(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw InvalidInput("aggregate: no records");

  std::vector<std::string> algo_order;
  auto algo_rank = [&](const std::string& a) {
    auto it = std::find(algo_order.begin(), algo_order.end(), a);
    if (it != algo_order.end()) return static_cast<std::size_t>(it - algo_order.begin());
    algo_order.push_back(a);
    return algo_order.size() - 1;
  };

  struct Acc {
    const TrialRecord* first = nullptr;
    std::size_t trials = 0, failed = 0;
    std::vector<double> rmse, srr, ser, before, after, time;
  };
  std::map<std::pair<std::size_t, std::size_t>, Acc> groups;
  for (const auto& r : records) {
    Acc& acc = groups[{r.grid_index, algo_rank(r.algorithm)}];
    if (!acc.first) acc.first = &r;
    ++acc.trials;
    if (r.failed) {
      ++acc.failed;
      continue;
    }
    if (std::isfinite(r.rmse)) acc.rmse.push_back(r.rmse);
    if (std::isfinite(r.srr)) acc.srr.push_back(r.srr);
    if (r.ser) acc.ser.push_back(*r.ser);
    if (r.denoise_before_db) acc.before.push_back(*r.denoise_before_db);
    if (r.denoise_after_db) acc.after.push_back(*r.denoise_after_db);
    acc.time.push_back(r.wall_time_s);
  }

  std::vector<SummaryRow> rows;
  for (auto& [key, acc] : groups) {
    SummaryRow row;
    row.scenario = acc.first->scenario;
    row.algorithm = acc.first->algorithm;
    row.point = acc.first->point;
    row.grid_index = key.first;
    row.trials = acc.trials;
    row.failed = acc.failed;
    row.rmse = summarize(acc.rmse);
    row.srr = summarize(acc.srr);
    row.ser = summarize(acc.ser);
    row.denoise_before_db = summarize(acc.before);
    row.denoise_after_db = summarize(acc.after);
    if (acc.time.empty()) {
      row.median_wall_time_s = kNaN;
    } else {
      auto t = acc.time;
      std::sort(t.begin(), t.end());
      const std::size_t n = t.size();
      row.median_wall_time_s = n % 2 ? t[n / 2] : 0.5 * (t[n / 2 - 1] + t[n / 2]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace kronsr
