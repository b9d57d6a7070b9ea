#include <kronsr/errors.hpp>
#include <kronsr/solvers.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace kronsr {

template <typename T>
SparseEstimate<T> omp(const Mat<T>& h, const Vec<T>& y, const SolverConfig& cfg) {
  if (h.rows() != y.size())
    throw DimensionError("omp: dictionary has " + std::to_string(h.rows()) +
                         " rows, measurement has length " + std::to_string(y.size()));
  if (!cfg.omp_sparsity && !cfg.omp_residual_tol)
    throw InvalidInput("omp: no stopping rule configured (set omp_sparsity or omp_residual_tol)");
  if (cfg.omp_sparsity && cfg.omp_residual_tol)
    throw InvalidInput("omp: set exactly one of omp_sparsity and omp_residual_tol");
  if (cfg.omp_sparsity && *cfg.omp_sparsity < 0) throw InvalidInput("omp: negative sparsity");
  if (cfg.omp_residual_tol && !(*cfg.omp_residual_tol >= 0.0))
    throw InvalidInput("omp: negative residual tolerance");

  const auto t0 = std::chrono::steady_clock::now();
  const Index n = h.cols();
  SparseEstimate<T> est;
  est.x_full = Vec<T>::Zero(n);

  const double y_norm = y.norm();
  const Index max_atoms = std::min<Index>(
      std::min(h.rows(), n), cfg.omp_sparsity ? static_cast<Index>(*cfg.omp_sparsity) : n);
  const double stop_norm = cfg.omp_residual_tol ? *cfg.omp_residual_tol * y_norm : -1.0;

  std::vector<Index> selected;
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  Vec<T> residual = y;
  Vec<T> coef;

  while (y_norm > 0.0 && static_cast<Index>(selected.size()) < max_atoms &&
         residual.norm() > stop_norm) {
    const Vec<T> corr = h.adjoint() * residual;
    Index best = -1;
    double best_mag = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      const double mag = std::abs(corr[j]);
      if (mag > best_mag) {
        best_mag = mag;
        best = j;
      }
    }
    if (best < 0) break;  // residual orthogonal to every remaining atom

    selected.push_back(best);
    Mat<T> sub(h.rows(), static_cast<Index>(selected.size()));
    for (std::size_t k = 0; k < selected.size(); ++k) sub.col(static_cast<Index>(k)) = h.col(selected[k]);
    Eigen::ColPivHouseholderQR<Mat<T>> qr(sub);
    if (qr.rank() < sub.cols()) {
      selected.pop_back();
      est.diagnostics.rank_deficient = true;
      break;
    }
    taken[static_cast<std::size_t>(best)] = 1;
    coef = qr.solve(y);
    residual = y - sub * coef;
    ++est.iterations_used;
  }

  for (std::size_t k = 0; k < selected.size(); ++k) est.x_full[selected[k]] = coef[static_cast<Index>(k)];
  est.support = threshold_support(est.x_full, cfg.support_threshold);
  est.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

template SparseEstimate<double> omp<double>(const Mat<double>&, const Vec<double>&,
                                            const SolverConfig&);
template SparseEstimate<cdouble> omp<cdouble>(const Mat<cdouble>&, const Vec<cdouble>&,
                                              const SolverConfig&);

}  // namespace kronsr
