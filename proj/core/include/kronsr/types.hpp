#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace kronsr {

using Index = Eigen::Index;
using cdouble = std::complex<double>;

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using DenseMatrix = Mat<cdouble>;
using DenseVector = Vec<cdouble>;
using RealVector = Eigen::VectorXd;

/// Diagnostics of one rank-one approximation inside a measurement decomposition.
/// `rows` x `cols` is the shape of the reshaped matrix that was approximated.
struct RankOneStep {
  Index rows = 0;
  Index cols = 0;
  double sigma = 0.0;         // leading singular value
  double residual_fro = 0.0;  // ||M - left * right^T||_F
};

/// Ordered Kronecker factors x = x_1 (x) x_2 (x) ... (x) x_I.
///
/// Chains produced by `decompose_chain` carry unit-norm factors 0..I-2 whose
/// largest-modulus entry is real and non-negative; the last factor holds the
/// scale. `steps` is empty for chains built by hand.
template <typename T>
struct FactorChain {
  std::vector<Vec<T>> factors;
  std::vector<RankOneStep> steps;

  std::size_t size() const { return factors.size(); }

  std::vector<Index> dims() const {
    std::vector<Index> d;
    d.reserve(factors.size());
    for (const auto& f : factors) d.push_back(f.size());
    return d;
  }
};

/// H = H_1 (x) H_2 (x) ... (x) H_I, stored factor-wise.
template <typename T>
struct KroneckerDictionary {
  std::vector<Mat<T>> factors;

  std::size_t size() const { return factors.size(); }

  std::vector<Index> row_dims() const {
    std::vector<Index> d;
    for (const auto& f : factors) d.push_back(f.rows());
    return d;
  }
  std::vector<Index> col_dims() const {
    std::vector<Index> d;
    for (const auto& f : factors) d.push_back(f.cols());
    return d;
  }
  Index rows() const {
    Index r = 1;
    for (const auto& f : factors) r *= f.rows();
    return r;
  }
  Index cols() const {
    Index c = 1;
    for (const auto& f : factors) c *= f.cols();
    return c;
  }
};

inline Index product(const std::vector<Index>& dims) {
  Index p = 1;
  for (Index d : dims) p *= d;
  return p;
}

}  // namespace kronsr
