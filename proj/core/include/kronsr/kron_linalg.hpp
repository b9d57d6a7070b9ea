#pragma once

// Kronecker-product utilities and the recursive rank-one measurement
// decomposition.
//
// Conventions used throughout the library:
//   * kron(a, b)[i * len(b) + j] = a[i] * b[j]  (left factor most significant)
//   * vectorization is column-major, so vec(Y) = y with Y[r, c] = y[c * rows + r];
//     in particular y_1 (x) ybar  <->  Y = ybar * y_1^T.
//   * phase convention: in a unit-norm factor the largest-modulus entry
//     (lowest index on ties) is real and non-negative.
//
// All functions are instantiated for double and std::complex<double>.

#include <kronsr/types.hpp>

#include <span>

namespace kronsr {

template <typename T>
Vec<T> kron_vectors(std::span<const Vec<T>> factors);

template <typename T>
Vec<T> kron_vectors(const std::vector<Vec<T>>& factors) {
  return kron_vectors<T>(std::span<const Vec<T>>(factors));
}

template <typename T>
Mat<T> kron_matrices(std::span<const Mat<T>> factors);

/// Materializes the full dictionary. Only meant for baselines and oracles.
template <typename T>
Mat<T> materialize(const KroneckerDictionary<T>& dict) {
  return kron_matrices<T>(std::span<const Mat<T>>(dict.factors));
}

/// (H_1 (x) ... (x) H_I)(x_1 (x) ... (x) x_I) computed as (x)(H_i x_i).
template <typename T>
Vec<T> kron_matvec(const KroneckerDictionary<T>& dict, const FactorChain<T>& x);

/// Applies (x)H_i to an arbitrary (not necessarily Kronecker) vector by
/// successive mode products, without materializing the dictionary.
template <typename T>
Vec<T> kron_apply(const KroneckerDictionary<T>& dict, const Vec<T>& x);

/// Column-major reshape: Y[r, c] = y[c * inner_rows + r].
template <typename T>
Mat<T> vec_to_matrix(const Vec<T>& y, Index inner_rows, Index outer_cols);

template <typename T>
struct RankOneApprox {
  Vec<T> left;        // sigma_1 * u_1, rotated to absorb the phase of right_unit
  Vec<T> right_unit;  // unit norm, phase-normalized
  double sigma = 0.0;
  double residual_fro = 0.0;
};

/// Best Frobenius rank-one approximation M ~ left * right_unit^T.
/// Throws InvalidInput for an all-zero matrix.
template <typename T>
RankOneApprox<T> rank_one_approx(const Mat<T>& m);

/// Splits y (length prod(dims)) into I factors with y ~ y_1 (x) ... (x) y_I using
/// I-1 recursive rank-one approximations. Factors 0..I-2 are unit-norm and
/// phase-normalized, the last one carries the scale.
template <typename T>
FactorChain<T> decompose_chain(const Vec<T>& y, const std::vector<Index>& dims);

/// Rotates v in place so that its largest-modulus entry is real and
/// non-negative; returns the unit-modulus factor p with v_old = p * v_new.
template <typename T>
T normalize_phase(Vec<T>& v);

}  // namespace kronsr
