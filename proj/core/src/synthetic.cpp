#include <kronsr/errors.hpp>
#include <kronsr/experiments.hpp>
#include <kronsr/kron_linalg.hpp>

#include "fnv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace kronsr {
namespace {

// Explicit loops keep the draw order (column-major) independent of how Eigen
// evaluates expressions.
Mat<double> normal_matrix(Index rows, Index cols, std::normal_distribution<double>& nd,
                          std::mt19937_64& rng) {
  Mat<double> m(rows, cols);
  for (Index j = 0; j < m.size(); ++j) m.data()[j] = nd(rng);
  return m;
}

}  // namespace

std::vector<Index> SyntheticConfig::row_dims() const {
  std::vector<Index> d{m};
  d.insert(d.end(), fixed_rows.begin(), fixed_rows.end());
  return d;
}

void SyntheticConfig::validate() const {
  if (N < 1) throw InvalidInput("synthetic: N must be positive");
  if (m < 1) throw InvalidInput("synthetic: m must be positive");
  if (fixed_rows.empty()) throw InvalidInput("synthetic: need at least two factors");
  for (Index r : fixed_rows)
    if (r < 1) throw InvalidInput("synthetic: factor row counts must be positive");
  if (S < 1 || S > N)
    throw InvalidInput("synthetic: S = " + std::to_string(S) + " outside [1, N = " +
                       std::to_string(N) + "]");
  if (!std::isfinite(snr_db)) throw InvalidInput("synthetic: SNR must be finite");
}

std::vector<Index> SyntheticInstance::true_support() const {
  std::vector<Index> s;
  for (Index i = 0; i < x_true.size(); ++i)
    if (x_true[i] != 0.0) s.push_back(i);
  return s;
}

SyntheticInstance gen_synthetic(const SyntheticConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  std::normal_distribution<double> nd(0.0, 1.0);
  auto normal = [&] { return nd(rng); };

  SyntheticInstance inst;
  for (Index rows : cfg.row_dims())
    inst.dict.factors.push_back(normal_matrix(rows, cfg.N, nd, rng));

  std::vector<Index> perm(static_cast<std::size_t>(cfg.N));
  for (std::size_t i = 0; i < inst.dict.size(); ++i) {
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Index> supp(perm.begin(), perm.begin() + cfg.S);
    std::sort(supp.begin(), supp.end());
    Vec<double> x = Vec<double>::Zero(cfg.N);
    for (Index j : supp) {
      double v = normal();
      while (v == 0.0) v = normal();
      x[j] = v;
    }
    inst.x_true_factors.factors.push_back(std::move(x));
  }
  inst.x_true = kron_vectors(inst.x_true_factors.factors);
  inst.y_clean = kron_matvec(inst.dict, inst.x_true_factors);

  Vec<double> noise = normal_matrix(inst.y_clean.size(), 1, nd, rng);
  const double target = inst.y_clean.squaredNorm() / std::pow(10.0, cfg.snr_db / 10.0);
  const double nn = noise.squaredNorm();
  noise *= nn > 0.0 ? std::sqrt(target / nn) : 0.0;
  inst.y_noisy = inst.y_clean + noise;
  inst.sigma2 = noise.squaredNorm() / static_cast<double>(noise.size());

  detail::Fnv1a h;
  for (const auto& f : inst.dict.factors) h.matrix(f);
  h.matrix(inst.x_true);
  h.matrix(inst.y_noisy);
  inst.hash = h.h;
  return inst;
}

}  // namespace kronsr
