// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Criteria can be selected on the command line, e.g.
// `kronsr_acceptance 1 2 9`; without arguments all of them run.

#include <kronsr/experiments.hpp>
#include <kronsr/irs_channel.hpp>
#include <kronsr/kron_linalg.hpp>
#include <kronsr/ser.hpp>
#include <kronsr/solvers.hpp>

#include "ser_oracle.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>

using namespace kronsr;
using kronsr::testing::random_matrix;
using kronsr::testing::random_vector;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double std_error(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

template <typename T>
Vec<T> sparse_vector(Index n, Index s, std::mt19937_64& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  Vec<T> x = Vec<T>::Zero(n);
  const Vec<T> vals = random_vector<T>(s, rng);
  for (Index k = 0; k < s; ++k) x[idx[static_cast<std::size_t>(k)]] = vals[k];
  return x;
}

// Records of one algorithm, in trial order.
std::vector<const TrialRecord*> by_algorithm(const std::vector<TrialRecord>& recs, Algorithm a) {
  std::vector<const TrialRecord*> out;
  for (const auto& r : recs)
    if (r.algorithm == to_string(a)) out.push_back(&r);
  return out;
}

std::size_t failures(const std::vector<const TrialRecord*>& rs) {
  return static_cast<std::size_t>(std::count_if(rs.begin(), rs.end(), [](auto* r) { return r->failed; }));
}

std::vector<double> rmse_of(const std::vector<const TrialRecord*>& rs) {
  std::vector<double> v;
  for (auto* r : rs) v.push_back(r->rmse);
  return v;
}

std::vector<double> times_of(const std::vector<const TrialRecord*>& rs) {
  std::vector<double> v;
  for (auto* r : rs) v.push_back(r->wall_time_s);
  return v;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  std::mt19937_64 rng(20240101);
  std::uniform_int_distribution<int> order_d(2, 3), n_d(4, 15);
  int exact = 0;
  double worst = 0.0;
  const int instances = 200;
  double solve_time = 0.0;
  const auto t0 = Clock::now();
  for (int k = 0; k < instances; ++k) {
    const int order = order_d(rng);
    KroneckerDictionary<double> dict;
    FactorChain<double> x;
    // One sparsity for all factors, so every factor needs N_i >= M_i >= 2S.
    std::vector<Index> ns;
    for (int i = 0; i < order; ++i) ns.push_back(n_d(rng));
    const Index n_min = *std::min_element(ns.begin(), ns.end());
    const int s = std::uniform_int_distribution<int>(1, static_cast<int>(std::min<Index>(4, n_min / 2)))(rng);
    for (int i = 0; i < order; ++i) {
      const Index m = std::uniform_int_distribution<Index>(2 * s, ns[static_cast<std::size_t>(i)])(rng);
      dict.factors.push_back(random_matrix<double>(m, ns[static_cast<std::size_t>(i)], rng));
      x.factors.push_back(sparse_vector<double>(ns[static_cast<std::size_t>(i)], s, rng));
    }
    const Vec<double> xt = kron_vectors(x.factors);
    const Vec<double> y = kron_matvec(dict, x);
    // Exact inner solves: M_i >= 2S makes the S-sparse solution of each
    // factor problem unique, and exhaustive search finds it.
    const FactorSolver<double> exact_solve = [s](std::size_t, const Mat<double>& h, const Vec<double>& yi,
                                           const SolverConfig&) {
      return kronsr::testing::exhaustive_l0<double>(h, yi, s);
    };
    const auto ts = Clock::now();
    const auto est = dsr(dict, y, exact_solve, SolverConfig{});
    solve_time += seconds_since(ts);
    const double err = (est.x_full - xt).norm() / xt.norm();
    worst = std::max(worst, err);
    exact += err < 1e-10;
  }
  const double total = seconds_since(t0);
  return {exact == instances && total < 10.0,
          fmt("%d/%d exact (worst relative error %.2e < 1e-10), %.2f s total (solves %.2f s) < 10 s",
              exact, instances, worst, total, solve_time)};
}

Outcome criterion2() {
  SweepSpec spec;
  spec.scenario = Scenario::DenoiseTable;
  spec.grid = default_grid(SweepVariable::Snr);
  spec.trials = 50;
  spec.base_seed = 2000;
  const auto t0 = Clock::now();
  const auto rows = aggregate(run_sweep(spec));
  const double elapsed = seconds_since(t0);
  // Published reference gains, SNR 5..30 dB, in 10 log10 of the norm.
  const std::map<double, double> reference{{5, 19.874 - 11.108}, {10, 17.370 - 8.577},
                                       {15, 14.855 - 6.141},  {20, 12.372 - 3.575},
                                       {25, 9.865 - 1.052},   {30, 7.357 + 1.507}};
  bool pass = elapsed < 120.0;
  std::string detail;
  for (const auto& r : rows) {
    const double gain = r.denoise_before_db.mean - r.denoise_after_db.mean;
    pass = pass && r.failed == 0 && gain >= 6.0;
    // The reference levels step by 2.5 dB per 5 dB of SNR, i.e. they are
    // 10 log10 of the norm; half of our gain is the comparable number.
    detail += fmt("%g dB: %.2f->%.2f (gain %.2f; halved %.2f vs reference %.2f); ", r.point.snr_db,
                  r.denoise_before_db.mean, r.denoise_after_db.mean, gain, 0.5 * gain,
                  reference.at(r.point.snr_db));
  }
  return {pass, detail + fmt("%.1f s < 120 s", elapsed)};
}

// Shared by criteria 3 and 4: 100 paired trials at m=12, S=3, 20 dB.
const std::vector<TrialRecord>& synthetic_records() {
  static const std::vector<TrialRecord> recs = [] {
    SweepSpec spec;
    spec.grid = {{20.0, 12, 3}};
    spec.algorithms = {Algorithm::dSBL, Algorithm::dOMP, Algorithm::SVD_KroSBL, Algorithm::OMP,
                       Algorithm::cSBL};
    spec.trials = 100;
    spec.base_seed = 3000;
    spec.progress = [](std::size_t done, std::size_t total) {
      if (done % 10 == 0) std::fprintf(stderr, "  synthetic trials %zu/%zu\n", done, total);
    };
    return run_sweep(spec);
  }();
  return recs;
}

Outcome criterion3() {
  const auto& recs = synthetic_records();
  std::string detail;
  bool pass = true;
  for (auto [d, c] : {std::pair{Algorithm::dSBL, Algorithm::cSBL}, std::pair{Algorithm::dOMP, Algorithm::OMP}}) {
    const auto rd = by_algorithm(recs, d), rc = by_algorithm(recs, c);
    if (failures(rd) + failures(rc) > 0) {
      pass = false;
      detail += fmt("%s/%s: %zu failed trials; ", to_string(d).c_str(), to_string(c).c_str(),
                    failures(rd) + failures(rc));
      continue;
    }
    std::vector<double> diff;
    for (std::size_t t = 0; t < rd.size(); ++t) diff.push_back(rc[t]->rmse - rd[t]->rmse);
    const double md = mean(diff), se = std_error(diff);
    pass = pass && md > 2.0 * se;
    detail += fmt("%s %.4f vs %s %.4f (paired diff %.4f, 2SE %.4f); ", to_string(d).c_str(),
                  mean(rmse_of(rd)), to_string(c).c_str(), mean(rmse_of(rc)), md, 2.0 * se);
  }
  return {pass, detail + fmt("%zu trials", by_algorithm(recs, Algorithm::dSBL).size())};
}

Outcome criterion4() {
  const auto& recs = synthetic_records();
  const double t_dsbl = median(times_of(by_algorithm(recs, Algorithm::dSBL)));
  const double t_svd = median(times_of(by_algorithm(recs, Algorithm::SVD_KroSBL)));
  const double t_csbl = median(times_of(by_algorithm(recs, Algorithm::cSBL)));
  const double t_domp = median(times_of(by_algorithm(recs, Algorithm::dOMP)));
  const double t_omp = median(times_of(by_algorithm(recs, Algorithm::OMP)));
  const double speedup = t_csbl / t_dsbl;
  const bool pass = t_dsbl < t_svd && t_svd < t_csbl && speedup >= 50.0 && t_domp < t_omp;
  return {pass, fmt("median s: dSBL %.2e < SVD-KroSBL %.2e < cSBL %.2e; dSBL speedup %.0fx >= 50x; "
                    "dOMP %.2e < OMP %.2e",
                    t_dsbl, t_svd, t_csbl, speedup, t_domp, t_omp)};
}

Outcome criterion5() {
  const SystemGeometry g;
  const ProtocolConfig pc;
  int ok = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 5000; seed < 5050; ++seed) {
    std::mt19937_64 rng(seed);
    const auto ch = draw_channel(g, rng);
    const auto p = draw_protocol(g, pc, rng);
    const auto m = build_measurement_model(p, g, received_pilots(ch, p, 0.0, rng), 0.0);
    const auto truth = ground_truth_factors(ch, g);
    FactorChain<cdouble> x;
    x.factors = {truth.g_l, truth.g_t_conj, truth.g_r};
    const double err = (kron_matvec(m.dictionary(), x) - m.y_tilde).norm() / m.y_tilde.norm();
    worst = std::max(worst, err);
    ok += err < 1e-8;
  }
  return {ok == 50, fmt("%d/50 realizations within 1e-8 (worst %.2e)", ok, worst)};
}

Outcome criterion6() {
  SweepSpec spec;
  spec.scenario = Scenario::Channel;
  spec.grid = {{30.0, 12, 3}};
  spec.algorithms = {Algorithm::dSBL, Algorithm::OMP, Algorithm::cSBL};
  spec.trials = 50;
  spec.base_seed = 6000;
  spec.channel.ser_symbols = 0;
  spec.progress = [](std::size_t done, std::size_t total) {
    if (done % 10 == 0) std::fprintf(stderr, "  channel trials %zu/%zu\n", done, total);
  };
  const auto recs = run_sweep(spec);
  const auto d = by_algorithm(recs, Algorithm::dSBL), c = by_algorithm(recs, Algorithm::cSBL),
             o = by_algorithm(recs, Algorithm::OMP);
  if (failures(d) + failures(c) + failures(o) > 0)
    return {false, fmt("failed trials: dSBL %zu, cSBL %zu, OMP %zu", failures(d), failures(c), failures(o))};
  const double rd = mean(rmse_of(d)), rc = mean(rmse_of(c)), ro = mean(rmse_of(o));
  const double speedup = median(times_of(c)) / median(times_of(d));
  return {rd < rc && rd < ro && speedup >= 50.0,
          fmt("mean RMSE dSBL %.4f < cSBL %.4f and < OMP %.4f; median time dSBL %.2e s, cSBL %.2e s "
              "(%.0fx >= 50x)",
              rd, rc, ro, median(times_of(d)), median(times_of(c)), speedup)};
}

Outcome criterion7() {
  const SystemGeometry g;
  const ProtocolConfig pc;
  const std::uint64_t per_channel = 100000;
  const int realizations = 10;

  // Perfect CSI at 25 dB against the independent per-stream simulation.
  std::uint64_t n_sim = 0, e_sim = 0, n_ref = 0, e_ref = 0;
  // dSBL-estimated vs perfect CSI at 30 dB on the same symbols and noise.
  std::uint64_t n30 = 0, e_perfect30 = 0, e_dsbl30 = 0;
  for (int k = 0; k < realizations; ++k) {
    const std::uint64_t seed = 7000 + static_cast<std::uint64_t>(k);
    {
      std::mt19937_64 rng(seed);
      const auto ch = draw_channel(g, rng);
      const auto p = draw_protocol(g, pc, rng);
      const auto hs = true_cascaded(ch, p);
      std::mt19937_64 a(seed ^ 1), b(seed ^ 2);
      const auto r = simulate_ser(hs, hs, 25.0, per_channel, a);
      const auto o = kronsr::testing::perfect_csi_oracle(hs, 25.0, per_channel, SerOptions{}.rank_tol, b);
      n_sim += r.symbols;
      e_sim += r.errors;
      n_ref += o.n;
      e_ref += o.err;
    }
    {
      std::mt19937_64 rng(seed);
      const auto inst = simulate_channel_instance(g, pc, 30.0, rng);
      SolverConfig cfg;
      cfg.noise_variance = inst.model.sigma2;
      const auto est = dsr(inst.model.dictionary(), inst.model.y_tilde, InnerSolver::SBL, cfg);
      const auto h_true = true_cascaded(inst.channel, inst.protocol);
      const auto h_est = reconstruct_cascaded(est.x_full, g, inst.protocol);
      std::mt19937_64 a(seed ^ 3), b(seed ^ 3);
      const auto perfect = simulate_ser(h_true, h_true, 30.0, per_channel, a);
      const auto dsbl = simulate_ser(h_true, h_est, 30.0, per_channel, b);
      n30 += perfect.symbols;
      e_perfect30 += perfect.errors;
      e_dsbl30 += dsbl.errors;
    }
  }
  const double p1 = static_cast<double>(e_sim) / static_cast<double>(n_sim);
  const double p2 = static_cast<double>(e_ref) / static_cast<double>(n_ref);
  const double pm = 0.5 * (p1 + p2);
  const double sd = std::sqrt(pm * (1 - pm) * (1.0 / static_cast<double>(n_sim) + 1.0 / static_cast<double>(n_ref)));
  const bool match = std::abs(p1 - p2) <= 3.0 * sd;
  const double ser_perfect = static_cast<double>(e_perfect30) / static_cast<double>(n30);
  const double ser_dsbl = static_cast<double>(e_dsbl30) / static_cast<double>(n30);
  const bool bound = ser_dsbl <= 2.0 * ser_perfect;
  return {match && bound,
          fmt("25 dB perfect CSI %.3e vs independent %.3e (|diff| %.2e <= 3 sigma %.2e, %llu symbols); "
              "30 dB dSBL %.3e <= 2 x perfect %.3e",
              p1, p2, std::abs(p1 - p2), 3.0 * sd, static_cast<unsigned long long>(n_sim), ser_dsbl,
              ser_perfect)};
}

Outcome criterion8() {
  std::mt19937_64 rng(8000);
  int sbl_ok = 0, omp_ok = 0;
  for (int k = 0; k < 100; ++k) {
    // Noiseless S=1: the oracle is the single column with least LS residual.
    const Mat<double> h = random_matrix<double>(3, 4, rng);
    const Vec<double> x = sparse_vector<double>(4, 1, rng);
    const Vec<double> y = h * x;
    Index best = 0;
    double best_res = INFINITY;
    for (Index j = 0; j < 4; ++j) {
      const Vec<double> col = h.col(j);
      const double res = (y - col * (col.dot(y) / col.squaredNorm())).norm();
      if (res < best_res) {
        best_res = res;
        best = j;
      }
    }
    SolverConfig cfg;
    cfg.noise_variance = 1e-10 * y.squaredNorm() / 3.0;
    sbl_ok += sbl(h, y, cfg).support == std::vector<Index>{best};

    const Mat<cdouble> hc = random_matrix<cdouble>(3, 4, rng);
    const Vec<cdouble> yc = hc * sparse_vector<cdouble>(4, 1, rng) + 0.1 * random_vector<cdouble>(3, rng);
    Index arg = 0;
    double peak = -1.0;
    for (Index j = 0; j < 4; ++j) {
      cdouble c(0.0);
      for (Index i = 0; i < 3; ++i) c += std::conj(hc(i, j)) * yc[i];
      if (std::abs(c) > peak) {
        peak = std::abs(c);
        arg = j;
      }
    }
    SolverConfig oc;
    oc.omp_sparsity = 1;
    omp_ok += omp(hc, yc, oc).support == std::vector<Index>{arg};
  }
  return {sbl_ok == 100 && omp_ok == 100,
          fmt("SBL support = exhaustive enumeration %d/100; OMP atom = exhaustive correlation %d/100",
              sbl_ok, omp_ok)};
}

Outcome criterion9() {
  const auto u = undersampling(SystemGeometry{}, ProtocolConfig{});
  return {u.measurements == 640 && u.coefficients == 5832,
          fmt("%lld measurements, %lld coefficients (ratio %.2f%%)", static_cast<long long>(u.measurements),
              static_cast<long long>(u.coefficients), 100.0 * u.ratio)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3,
                                                       criterion4, criterion5, criterion6,
                                                       criterion7, criterion8, criterion9};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int c = std::atoi(argv[i]);
    if (c < 1 || c > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s' (expected 1-%zu)\n", argv[i], criteria.size());
      return 2;
    }
    selected.insert(c);
  }
  if (selected.empty())
    for (int c = 1; c <= static_cast<int>(criteria.size()); ++c) selected.insert(c);

  int failed = 0;
  for (int c : selected) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(c - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d: %s  %s  [%.1f s]\n", c, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
