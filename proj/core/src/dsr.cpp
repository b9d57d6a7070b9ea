#include <kronsr/errors.hpp>
#include <kronsr/kron_linalg.hpp>
#include <kronsr/solvers.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <string>

namespace kronsr {

// Per-entry noise in the reshaped matrix of a step is estimated from the
// rank-one residual over its residual degrees of freedom. A unit-norm factor
// is a leading singular vector, so its per-entry noise is that variance over
// sigma_1^2; the last factor is a projection of the data and keeps the
// per-entry variance of its own step.
template <typename T>
double per_factor_noise_variance(const SolverConfig& cfg, const FactorChain<T>& decomposition,
                                 std::size_t factor_index) {
  if (factor_index >= decomposition.size())
    throw DimensionError("per_factor_noise_variance: factor index out of range");
  if (decomposition.steps.empty() || decomposition.steps.size() + 1 != decomposition.size())
    throw InvalidInput("per_factor_noise_variance: chain carries no decomposition metadata");
  if (!(cfg.noise_variance > 0.0)) return cfg.noise_floor;

  const std::size_t last_step = decomposition.steps.size() - 1;
  const RankOneStep& step = decomposition.steps[std::min(factor_index, last_step)];
  const double r = static_cast<double>(step.rows);
  const double c = static_cast<double>(step.cols);
  const double dof = std::max(1.0, r * c - (r + c - 1.0));
  const double entry_var = step.residual_fro * step.residual_fro / dof;
  double var = entry_var;
  if (factor_index <= last_step) var = step.sigma > 0.0 ? entry_var / (step.sigma * step.sigma) : 0.0;
  return std::max(cfg.noise_floor, var);
}

template <typename T>
SparseEstimate<T> dsr(const KroneckerDictionary<T>& dict, const Vec<T>& y,
                      const FactorSolver<T>& inner, const SolverConfig& cfg) {
  validate(cfg);
  if (!inner) throw InvalidInput("dsr: no inner solver");
  if (dict.size() < 2) throw InvalidInput("dsr: need a dictionary with at least two factors");
  if (dict.rows() != y.size())
    throw DimensionError("dsr: factor row counts multiply to " + std::to_string(dict.rows()) +
                         " but measurement has length " + std::to_string(y.size()));

  const auto t0 = std::chrono::steady_clock::now();
  const FactorChain<T> decomposition = decompose_chain(y, dict.row_dims());

  auto solve_factor = [&](std::size_t i) -> SparseEstimate<T> {
    SolverConfig sub = cfg;
    try {
      sub.noise_variance = per_factor_noise_variance(cfg, decomposition, i);
      return inner(i, dict.factors[i], decomposition.factors[i], sub);
    } catch (const std::exception& e) {
      throw FactorSolveError(i, e.what());
    }
  };

  std::vector<SparseEstimate<T>> parts;
  parts.reserve(dict.size());
  if (cfg.parallel_subproblems) {
    std::vector<std::future<SparseEstimate<T>>> jobs;
    for (std::size_t i = 0; i < dict.size(); ++i)
      jobs.push_back(std::async(std::launch::async, solve_factor, i));
    for (auto& j : jobs) parts.push_back(j.get());
  } else {
    for (std::size_t i = 0; i < dict.size(); ++i) parts.push_back(solve_factor(i));
  }

  SparseEstimate<T> est;
  FactorChain<T> xf;
  std::vector<std::vector<Index>> supports;
  for (auto& p : parts) {
    est.iterations_used += p.iterations_used;
    est.diagnostics.rank_deficient = est.diagnostics.rank_deficient || p.diagnostics.rank_deficient;
    supports.push_back(p.support);
    xf.factors.push_back(std::move(p.x_full));
  }
  est.x_full = kron_vectors(xf.factors);
  est.support = kron_support(supports, dict.col_dims());
  est.x_factors = std::move(xf);
  est.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

template <typename T>
SparseEstimate<T> dsr(const KroneckerDictionary<T>& dict, const Vec<T>& y, InnerSolver inner,
                      const SolverConfig& cfg) {
  if (inner == InnerSolver::SBL)
    return dsr<T>(dict, y, FactorSolver<T>([](std::size_t, const Mat<T>& h, const Vec<T>& yi,
                                              const SolverConfig& sub) { return sbl(h, yi, sub); }),
                  cfg);
  return dsr<T>(dict, y,
                FactorSolver<T>([](std::size_t, const Mat<T>& h, const Vec<T>& yi, SolverConfig sub) {
                  if (!sub.omp_sparsity && !sub.omp_residual_tol) {
                    const double yn = yi.norm();
                    sub.omp_residual_tol =
                        yn > 0.0 ? 1.1 * std::sqrt(static_cast<double>(yi.size()) * sub.noise_variance) / yn
                                 : 0.0;
                  }
                  return omp(h, yi, sub);
                }),
                cfg);
}

template double per_factor_noise_variance<double>(const SolverConfig&, const FactorChain<double>&,
                                                  std::size_t);
template double per_factor_noise_variance<cdouble>(const SolverConfig&,
                                                   const FactorChain<cdouble>&, std::size_t);
template SparseEstimate<double> dsr<double>(const KroneckerDictionary<double>&, const Vec<double>&,
                                            InnerSolver, const SolverConfig&);
template SparseEstimate<double> dsr<double>(const KroneckerDictionary<double>&, const Vec<double>&,
                                            const FactorSolver<double>&, const SolverConfig&);
template SparseEstimate<cdouble> dsr<cdouble>(const KroneckerDictionary<cdouble>&,
                                              const Vec<cdouble>&, const FactorSolver<cdouble>&,
                                              const SolverConfig&);
template SparseEstimate<cdouble> dsr<cdouble>(const KroneckerDictionary<cdouble>&,
                                              const Vec<cdouble>&, InnerSolver,
                                              const SolverConfig&);

}  // namespace kronsr
