#pragma once

// Sparse recovery: OMP, classic SBL, KroSBL baselines and the
// decomposition-based framework (dSR) that splits a Kronecker-structured
// problem into independent per-factor problems.
//
// Every solver is templated on the scalar type and instantiated for double
// and std::complex<double>. Real inputs give exactly the same iterates as the
// complex code applied to the zero-imaginary embedding.

#include <kronsr/types.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kronsr {

struct SolverConfig {
  int max_em_iters = 150;
  double em_tol = 1e-4;            // relative change of the hyperparameter vector
  double prune_threshold = 1e-6;   // relative to max(gamma)
  double noise_variance = 0.0;     // sigma^2
  double noise_floor = 1e-10;      // lower bound of per-factor noise estimates in dSR
  double support_threshold = 1e-3; // |x_n| > support_threshold * max|x|
  std::optional<int> omp_sparsity;
  std::optional<double> omp_residual_tol;  // stop when ||r|| <= tol * ||y||
  int am_inner_iters = 10;
  bool parallel_subproblems = false;  // dSR: run factor problems on std::async
};

/// Throws InvalidInput if the configuration violates its invariants.
void validate(const SolverConfig& cfg);

struct SolverDiagnostics {
  bool rank_deficient = false;          // OMP met a singular sub-dictionary
  std::vector<double> log_likelihood;   // SBL family: marginal log-likelihood per E-step
  std::vector<Index> active_sizes;      // SBL family: surviving hyperparameters per E-step
};

template <typename T>
struct SparseEstimate {
  Vec<T> x_full;
  std::optional<FactorChain<T>> x_factors;  // set by dsr
  std::vector<Index> support;               // sorted ascending
  int iterations_used = 0;
  double wall_time_s = 0.0;
  SolverDiagnostics diagnostics;
};

/// Non-negative hyperparameter factors; factors 0..I-2 have unit norm.
struct GammaChain {
  std::vector<RealVector> factors;
};

enum class KroMode { AM, SVD };
enum class InnerSolver { OMP, SBL };

/// Indices with |x_n| > rel * max|x| (empty for the zero vector).
template <typename T>
std::vector<Index> threshold_support(const Vec<T>& x, double rel);

/// Support of (x) x_i given the per-factor supports: all index tuples, mapped
/// to the flat index with the first factor most significant.
std::vector<Index> kron_support(const std::vector<std::vector<Index>>& factor_supports,
                                const std::vector<Index>& dims);

template <typename T>
SparseEstimate<T> omp(const Mat<T>& h, const Vec<T>& y, const SolverConfig& cfg);

template <typename T>
SparseEstimate<T> sbl(const Mat<T>& h, const Vec<T>& y, const SolverConfig& cfg);

GammaChain gamma_project_am(const RealVector& d, const std::vector<Index>& dims, int iters);
/// Same as above but warm-started from `init` (must match dims).
GammaChain gamma_project_am(const RealVector& d, const std::vector<Index>& dims, int iters,
                            const GammaChain& init);
GammaChain gamma_project_svd(const RealVector& d, const std::vector<Index>& dims);
RealVector kron_gamma(const GammaChain& g);

template <typename T>
SparseEstimate<T> krosbl(const KroneckerDictionary<T>& dict, const Vec<T>& y,
                         const SolverConfig& cfg, KroMode mode);

/// Noise variance handed to the inner solver of factor `factor_index`, derived
/// from the rank-one residuals recorded in `decomposition.steps`.
template <typename T>
double per_factor_noise_variance(const SolverConfig& cfg, const FactorChain<T>& decomposition,
                                 std::size_t factor_index);

template <typename T>
SparseEstimate<T> dsr(const KroneckerDictionary<T>& dict, const Vec<T>& y, InnerSolver inner,
                      const SolverConfig& cfg);

/// Per-factor solve used by dsr: receives the factor index, H_i, y_i and a
/// copy of the configuration whose noise_variance holds the per-factor
/// estimate.
template <typename T>
using FactorSolver = std::function<SparseEstimate<T>(std::size_t factor, const Mat<T>& h,
                                                     const Vec<T>& y, const SolverConfig& cfg)>;

template <typename T>
SparseEstimate<T> dsr(const KroneckerDictionary<T>& dict, const Vec<T>& y,
                      const FactorSolver<T>& inner, const SolverConfig& cfg);

std::string to_string(KroMode m);
std::string to_string(InnerSolver s);

}  // namespace kronsr
