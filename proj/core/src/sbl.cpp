#include <kronsr/solvers.hpp>

#include <kronsr/errors.hpp>

#include "sbl_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kronsr {

void validate(const SolverConfig& cfg) {
  if (cfg.max_em_iters < 1) throw InvalidInput("max_em_iters must be >= 1");
  if (!(cfg.em_tol > 0.0)) throw InvalidInput("em_tol must be positive");
  if (!(cfg.prune_threshold > 0.0 && cfg.prune_threshold < 1.0))
    throw InvalidInput("prune_threshold must lie in (0, 1)");
  if (!(cfg.noise_variance >= 0.0)) throw InvalidInput("noise_variance must be >= 0");
  if (!(cfg.noise_floor > 0.0)) throw InvalidInput("noise_floor must be positive");
  if (!(cfg.support_threshold >= 0.0 && cfg.support_threshold < 1.0))
    throw InvalidInput("support_threshold must lie in [0, 1)");
  if (cfg.am_inner_iters < 0) throw InvalidInput("am_inner_iters must be >= 0");
}

template <typename T>
std::vector<Index> threshold_support(const Vec<T>& x, double rel) {
  std::vector<Index> s;
  if (x.size() == 0) return s;
  const double peak = x.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return s;
  const double cut = rel * peak;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > cut) s.push_back(i);
  return s;
}

std::vector<Index> kron_support(const std::vector<std::vector<Index>>& factor_supports,
                                const std::vector<Index>& dims) {
  if (factor_supports.size() != dims.size())
    throw DimensionError("kron_support: supports and dims differ in length");
  std::vector<Index> out{0};
  for (std::size_t i = 0; i < dims.size(); ++i) {
    std::vector<Index> next;
    next.reserve(out.size() * factor_supports[i].size());
    for (Index base : out)
      for (Index j : factor_supports[i]) next.push_back(base * dims[i] + j);
    out = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <typename T>
SparseEstimate<T> sbl(const Mat<T>& h, const Vec<T>& y, const SolverConfig& cfg) {
  validate(cfg);
  if (h.rows() != y.size())
    throw DimensionError("sbl: dictionary has " + std::to_string(h.rows()) +
                         " rows, measurement has length " + std::to_string(y.size()));
  if (!(cfg.noise_variance > 0.0)) throw InvalidInput("sbl: noise_variance must be positive");

  return detail::run_em(h, y, cfg, "sbl", [](const RealVector& d) { return d; });
}

template std::vector<Index> threshold_support<double>(const Vec<double>&, double);
template std::vector<Index> threshold_support<cdouble>(const Vec<cdouble>&, double);
template SparseEstimate<double> sbl<double>(const Mat<double>&, const Vec<double>&,
                                            const SolverConfig&);
template SparseEstimate<cdouble> sbl<cdouble>(const Mat<cdouble>&, const Vec<cdouble>&,
                                              const SolverConfig&);

}  // namespace kronsr
