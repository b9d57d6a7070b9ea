#pragma once

// E-step shared by classic SBL and KroSBL: posterior mean and diagonal
// covariance of x under the prior CN(0, diag(gamma)) restricted to the active
// (unpruned) columns. The algebra switches between the measurement-space form
// (M x M Cholesky) and the coefficient-space form (N_A x N_A Cholesky)
// depending on which is cheaper for the current active-set size.

#include <kronsr/errors.hpp>
#include <kronsr/solvers.hpp>
#include <kronsr/types.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace kronsr::detail {

template <typename T>
struct EStepResult {
  Vec<T> mu;             // over the active set
  RealVector sigma_diag; // over the active set
  double log_likelihood = 0.0;
  bool ok = true;
};

template <typename T>
class SblEngine {
 public:
  SblEngine(const Mat<T>& h, const Vec<T>& y, double sigma2) : h_(h), y_(y), sigma2_(sigma2) {}

  EStepResult<T> estep(const std::vector<Index>& active, const RealVector& gamma_active) {
    gather(active);
    const double m = static_cast<double>(h_.rows());
    const double na = static_cast<double>(active.size());
    const double measurement_cost = 1.5 * m * m * na + m * m * m / 3.0;
    const double coefficient_cost = 0.5 * m * na * na + 2.0 * na * na * na / 3.0;
    return measurement_cost <= coefficient_cost ? measurement_space(gamma_active)
                                                : coefficient_space(gamma_active);
  }

 private:
  void gather(const std::vector<Index>& active) {
    if (active == cached_active_ && ha_.cols() == static_cast<Index>(active.size())) return;
    cached_active_ = active;
    ha_.resize(h_.rows(), static_cast<Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) ha_.col(static_cast<Index>(k)) = h_.col(active[k]);
    hty_ = ha_.adjoint() * y_;
  }

  // C = sigma^2 I + H_A Gamma H_A^H
  EStepResult<T> measurement_space(const RealVector& gamma) {
    EStepResult<T> out;
    const Index m = h_.rows();
    Mat<T> scaled = ha_ * gamma.cwiseSqrt().asDiagonal();
    Mat<T> c = Mat<T>::Identity(m, m) * sigma2_;
    c.template selfadjointView<Eigen::Lower>().rankUpdate(scaled);
    Eigen::LLT<Mat<T>, Eigen::Lower> llt(c);
    if (llt.info() != Eigen::Success) {
      out.ok = false;
      return out;
    }
    const Vec<T> ciy = llt.solve(y_);
    out.mu = gamma.template cast<T>().cwiseProduct(ha_.adjoint() * ciy);
    const Mat<T> w = llt.matrixL().solve(ha_);
    const RealVector q = w.colwise().squaredNorm().transpose();
    out.sigma_diag = (gamma - gamma.cwiseProduct(gamma).cwiseProduct(q)).cwiseMax(0.0);

    double logdet = 0.0;
    const auto& l = llt.matrixLLT();
    for (Index i = 0; i < m; ++i) logdet += 2.0 * std::log(std::abs(l(i, i)));
    out.log_likelihood = -(logdet + std::real(y_.dot(ciy)));
    return out;
  }

  // B = I + sigma^-2 Gamma^1/2 H_A^H H_A Gamma^1/2, Sigma = Gamma^1/2 B^-1 Gamma^1/2
  EStepResult<T> coefficient_space(const RealVector& gamma) {
    EStepResult<T> out;
    const Index na = ha_.cols();
    const RealVector s = gamma.cwiseSqrt();
    Mat<T> scaled = ha_ * s.asDiagonal();
    Mat<T> b = Mat<T>::Identity(na, na);
    b.template selfadjointView<Eigen::Lower>().rankUpdate(scaled.adjoint(), 1.0 / sigma2_);
    Eigen::LLT<Mat<T>, Eigen::Lower> llt(b);
    if (llt.info() != Eigen::Success) {
      out.ok = false;
      return out;
    }
    const Vec<T> shty = s.template cast<T>().cwiseProduct(hty_);
    out.mu = s.template cast<T>().cwiseProduct(llt.solve(shty)) / sigma2_;
    const Mat<T> linv = llt.matrixL().solve(Mat<T>::Identity(na, na));
    const RealVector binv_diag = linv.colwise().squaredNorm().transpose();
    out.sigma_diag = gamma.cwiseProduct(binv_diag).cwiseMax(0.0);

    double logdet = static_cast<double>(h_.rows()) * std::log(sigma2_);
    const auto& l = llt.matrixLLT();
    for (Index i = 0; i < na; ++i) logdet += 2.0 * std::log(std::abs(l(i, i)));
    const double quad = (y_.squaredNorm() - std::real(hty_.dot(out.mu))) / sigma2_;
    out.log_likelihood = -(logdet + quad);
    return out;
  }

  const Mat<T>& h_;
  const Vec<T>& y_;
  double sigma2_;
  std::vector<Index> cached_active_;
  Mat<T> ha_;
  Vec<T> hty_;
};

template <typename T>
bool all_finite(const EStepResult<T>& r) {
  return std::isfinite(r.log_likelihood) && r.mu.allFinite() && r.sigma_diag.allFinite();
}

/// EM iterations with irreversible pruning. `m_step(d)` maps the unstructured
/// update d_n = |mu_n|^2 + Sigma_nn (zero at pruned indices) to the next
/// hyperparameter vector; entries at pruned indices are forced back to zero.
template <typename T, typename MStep>
SparseEstimate<T> run_em(const Mat<T>& h, const Vec<T>& y, const SolverConfig& cfg,
                         const char* name, MStep&& m_step) {
  const auto t0 = std::chrono::steady_clock::now();
  const Index n = h.cols();
  SparseEstimate<T> est;
  est.x_full = Vec<T>::Zero(n);
  if (y.norm() == 0.0) {
    est.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return est;
  }

  SblEngine<T> engine(h, y, cfg.noise_variance);
  RealVector gamma = RealVector::Ones(n);
  std::vector<Index> active(static_cast<std::size_t>(n));
  std::iota(active.begin(), active.end(), Index{0});
  Vec<T> mu_full = Vec<T>::Zero(n);

  for (int it = 0; it < cfg.max_em_iters; ++it) {
    RealVector g_active(static_cast<Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) g_active[static_cast<Index>(k)] = gamma[active[k]];

    const EStepResult<T> es = engine.estep(active, g_active);
    if (!es.ok || !all_finite(es))
      throw NumericalError(std::string(name) + ": non-finite posterior", it);
    est.diagnostics.log_likelihood.push_back(es.log_likelihood);
    est.diagnostics.active_sizes.push_back(static_cast<Index>(active.size()));

    mu_full.setZero();
    RealVector d = RealVector::Zero(n);
    for (std::size_t k = 0; k < active.size(); ++k) {
      const auto kk = static_cast<Index>(k);
      mu_full[active[k]] = es.mu[kk];
      d[active[k]] = std::norm(es.mu[kk]) + es.sigma_diag[kk];
    }

    RealVector next = m_step(d);
    if (!next.allFinite()) throw NumericalError(std::string(name) + ": non-finite update", it);
    // Pruning is irreversible: only currently active entries may survive.
    RealVector masked = RealVector::Zero(n);
    for (Index idx : active) masked[idx] = std::max(next[idx], 0.0);
    const double cut = cfg.prune_threshold * masked.maxCoeff();
    std::vector<Index> survivors;
    survivors.reserve(active.size());
    for (Index idx : active) {
      if (masked[idx] > cut && masked[idx] > 0.0)
        survivors.push_back(idx);
      else
        masked[idx] = 0.0;
    }

    const double change = (masked - gamma).norm() / gamma.norm();
    gamma = std::move(masked);
    active = std::move(survivors);
    est.iterations_used = it + 1;
    if (change < cfg.em_tol || active.empty()) break;
  }

  // Coefficients whose hyperparameter was pruned by the last update are zero.
  for (Index i = 0; i < n; ++i)
    if (gamma[i] == 0.0) mu_full[i] = T(0);
  est.x_full = std::move(mu_full);
  est.support = threshold_support(est.x_full, cfg.support_threshold);
  est.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

}  // namespace kronsr::detail
