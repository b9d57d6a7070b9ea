#include <kronsr/experiments.hpp>
#include <kronsr/irs_channel.hpp>
#include <kronsr/kron_linalg.hpp>
#include <kronsr/solvers.hpp>

#include <benchmark/benchmark.h>

using namespace kronsr;

namespace {

SyntheticInstance synthetic(Index m) {
  SyntheticConfig c;
  c.m = m;
  std::mt19937_64 rng(1);
  return gen_synthetic(c, rng);
}

SolverConfig sbl_config(double sigma2) {
  SolverConfig c;
  c.noise_variance = sigma2;
  return c;
}

}  // namespace

static void BM_KronMatvec(benchmark::State& state) {
  const auto inst = synthetic(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kron_matvec(inst.dict, inst.x_true_factors));
}
BENCHMARK(BM_KronMatvec)->Arg(4)->Arg(12);

static void BM_MaterializedMatvec(benchmark::State& state) {
  const auto inst = synthetic(state.range(0));
  const Mat<double> h = materialize(inst.dict);
  for (auto _ : state) benchmark::DoNotOptimize((h * inst.x_true).eval());
}
BENCHMARK(BM_MaterializedMatvec)->Arg(4)->Arg(12);

static void BM_DecomposeChain(benchmark::State& state) {
  const auto inst = synthetic(12);
  const auto dims = inst.dict.row_dims();
  for (auto _ : state) benchmark::DoNotOptimize(decompose_chain(inst.y_noisy, dims));
}
BENCHMARK(BM_DecomposeChain);

static void BM_DecomposeChannel(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto inst = simulate_channel_instance(SystemGeometry{}, ProtocolConfig{}, 20.0, rng);
  const auto dims = inst.model.row_dims();
  for (auto _ : state) benchmark::DoNotOptimize(decompose_chain(inst.model.y_tilde, dims));
}
BENCHMARK(BM_DecomposeChannel);

static void BM_dSBL(benchmark::State& state) {
  const auto inst = synthetic(state.range(0));
  const auto cfg = sbl_config(inst.sigma2);
  for (auto _ : state) benchmark::DoNotOptimize(dsr(inst.dict, inst.y_noisy, InnerSolver::SBL, cfg));
}
BENCHMARK(BM_dSBL)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_dOMP(benchmark::State& state) {
  const auto inst = synthetic(state.range(0));
  SolverConfig cfg;
  cfg.omp_sparsity = 3;
  for (auto _ : state) benchmark::DoNotOptimize(dsr(inst.dict, inst.y_noisy, InnerSolver::OMP, cfg));
}
BENCHMARK(BM_dOMP)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_SvdKroSBL(benchmark::State& state) {
  const auto inst = synthetic(state.range(0));
  const auto cfg = sbl_config(inst.sigma2);
  for (auto _ : state) benchmark::DoNotOptimize(krosbl(inst.dict, inst.y_noisy, cfg, KroMode::SVD));
}
BENCHMARK(BM_SvdKroSBL)->Arg(2)->Unit(benchmark::kMillisecond)->Iterations(1);

static void BM_cSBL(benchmark::State& state) {
  const auto inst = synthetic(state.range(0));
  const Mat<double> h = materialize(inst.dict);
  const auto cfg = sbl_config(inst.sigma2);
  for (auto _ : state) benchmark::DoNotOptimize(sbl(h, inst.y_noisy, cfg));
}
BENCHMARK(BM_cSBL)->Arg(2)->Unit(benchmark::kMillisecond)->Iterations(1);

static void BM_OMP(benchmark::State& state) {
  const auto inst = synthetic(state.range(0));
  const Mat<double> h = materialize(inst.dict);
  SolverConfig cfg;
  cfg.omp_sparsity = 27;
  for (auto _ : state) benchmark::DoNotOptimize(omp(h, inst.y_noisy, cfg));
}
BENCHMARK(BM_OMP)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_ChannelDSBL(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto inst = simulate_channel_instance(SystemGeometry{}, ProtocolConfig{}, 30.0, rng);
  const auto dict = inst.model.dictionary();
  const auto cfg = sbl_config(inst.model.sigma2);
  for (auto _ : state) benchmark::DoNotOptimize(dsr(dict, inst.model.y_tilde, InnerSolver::SBL, cfg));
}
BENCHMARK(BM_ChannelDSBL)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
