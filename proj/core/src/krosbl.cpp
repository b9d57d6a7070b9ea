#include <kronsr/errors.hpp>
#include <kronsr/kron_linalg.hpp>
#include <kronsr/solvers.hpp>

#include "sbl_engine.hpp"

#include <cmath>
#include <string>

namespace kronsr {
namespace {

void check_gamma_input(const RealVector& d, const std::vector<Index>& dims) {
  if (dims.empty()) throw InvalidInput("gamma projection: empty dims");
  for (Index n : dims)
    if (n <= 0) throw DimensionError("gamma projection: non-positive dimension");
  if (product(dims) != d.size())
    throw DimensionError("gamma projection: product of dims " + std::to_string(product(dims)) +
                         " != length " + std::to_string(d.size()));
  if (!d.allFinite() || (d.array() < 0.0).any())
    throw InvalidInput("gamma projection: input must be finite and non-negative");
  if (!(d.maxCoeff() > 0.0)) throw InvalidInput("gamma projection: all-zero input");
}

// Factors 0..I-2 to unit norm, scale moved into the last factor.
void normalize_chain(GammaChain& g) {
  if (g.factors.size() < 2) return;
  double scale = 1.0;
  for (std::size_t i = 0; i + 1 < g.factors.size(); ++i) {
    const double nrm = g.factors[i].norm();
    if (nrm > 0.0) {
      g.factors[i] /= nrm;
      scale *= nrm;
    }
  }
  g.factors.back() *= scale;
}

GammaChain ones_chain(const std::vector<Index>& dims) {
  GammaChain g;
  for (Index n : dims) g.factors.push_back(RealVector::Ones(n));
  normalize_chain(g);
  return g;
}

}  // namespace

RealVector kron_gamma(const GammaChain& g) {
  return kron_vectors<double>(std::span<const RealVector>(g.factors));
}

GammaChain gamma_project_am(const RealVector& d, const std::vector<Index>& dims, int iters) {
  check_gamma_input(d, dims);
  return gamma_project_am(d, dims, iters, ones_chain(dims));
}

GammaChain gamma_project_am(const RealVector& d, const std::vector<Index>& dims, int iters,
                            const GammaChain& init) {
  check_gamma_input(d, dims);
  if (iters < 0) throw InvalidInput("gamma_project_am: negative iteration count");
  if (init.factors.size() != dims.size())
    throw DimensionError("gamma_project_am: initial chain has wrong factor count");
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (init.factors[k].size() != dims[k])
      throw DimensionError("gamma_project_am: initial factor " + std::to_string(k) +
                           " has wrong length");

  GammaChain g = init;
  const std::size_t order = dims.size();
  std::vector<Index> stride(order, 1);
  for (std::size_t k = order - 1; k-- > 0;) stride[k] = stride[k + 1] * dims[k + 1];

  for (int pass = 0; pass < iters; ++pass) {
    for (std::size_t k = 0; k < order; ++k) {
      // Closed-form least squares for factor k with the others fixed.
      double denom = 1.0;
      for (std::size_t j = 0; j < order; ++j)
        if (j != k) denom *= g.factors[j].squaredNorm();
      RealVector num = RealVector::Zero(dims[k]);
      for (Index flat = 0; flat < d.size(); ++flat) {
        if (d[flat] == 0.0) continue;
        double w = d[flat];
        for (std::size_t j = 0; j < order && w != 0.0; ++j)
          if (j != k) w *= g.factors[j][(flat / stride[j]) % dims[j]];
        num[(flat / stride[k]) % dims[k]] += w;
      }
      g.factors[k] = denom > 0.0 ? RealVector((num / denom).cwiseMax(0.0)) : RealVector::Zero(dims[k]);
    }
    normalize_chain(g);
  }
  return g;
}

GammaChain gamma_project_svd(const RealVector& d, const std::vector<Index>& dims) {
  check_gamma_input(d, dims);
  GammaChain g;
  if (dims.size() == 1) {
    g.factors.push_back(d);
    return g;
  }
  FactorChain<double> chain = decompose_chain<double>(d, dims);
  for (auto& f : chain.factors) g.factors.push_back(f.cwiseMax(0.0));
  normalize_chain(g);
  return g;
}

template <typename T>
SparseEstimate<T> krosbl(const KroneckerDictionary<T>& dict, const Vec<T>& y,
                         const SolverConfig& cfg, KroMode mode) {
  validate(cfg);
  if (dict.size() == 0) throw InvalidInput("krosbl: empty dictionary");
  if (dict.rows() != y.size())
    throw DimensionError("krosbl: dictionary has " + std::to_string(dict.rows()) +
                         " rows, measurement has length " + std::to_string(y.size()));
  if (!(cfg.noise_variance > 0.0)) throw InvalidInput("krosbl: noise_variance must be positive");

  const Mat<T> h = materialize(dict);
  const std::vector<Index> dims = dict.col_dims();
  GammaChain current = ones_chain(dims);

  auto project = [&](const RealVector& d) -> RealVector {
    if (!(d.maxCoeff() > 0.0)) return d;
    current = mode == KroMode::SVD ? gamma_project_svd(d, dims)
                                   : gamma_project_am(d, dims, cfg.am_inner_iters, current);
    return kron_gamma(current);
  };
  return detail::run_em(h, y, cfg, mode == KroMode::SVD ? "svd-krosbl" : "am-krosbl", project);
}

template SparseEstimate<double> krosbl<double>(const KroneckerDictionary<double>&,
                                               const Vec<double>&, const SolverConfig&, KroMode);
template SparseEstimate<cdouble> krosbl<cdouble>(const KroneckerDictionary<cdouble>&,
                                                 const Vec<cdouble>&, const SolverConfig&,
                                                 KroMode);

std::string to_string(KroMode m) { return m == KroMode::SVD ? "SVD" : "AM"; }
std::string to_string(InnerSolver s) { return s == InnerSolver::SBL ? "SBL" : "OMP"; }

}  // namespace kronsr
