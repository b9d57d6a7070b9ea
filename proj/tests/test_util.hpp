#pragma once

#include <kronsr/solvers.hpp>
#include <kronsr/types.hpp>

#include <Eigen/QR>

#include <limits>
#include <random>
#include <type_traits>
#include <vector>

namespace kronsr::testing {

template <typename T>
Mat<T> random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat<T> m(rows, cols);
  for (Index j = 0; j < m.size(); ++j) {
    if constexpr (std::is_same_v<T, double>)
      m.data()[j] = nd(rng);
    else
      m.data()[j] = T(nd(rng), nd(rng));
  }
  return m;
}

template <typename T>
Vec<T> random_vector(Index n, std::mt19937_64& rng) {
  return random_matrix<T>(n, 1, rng);
}

/// Naive oracle: entry (i*len(b)+j) = a[i]*b[j].
template <typename T>
Vec<T> naive_kron(const Vec<T>& a, const Vec<T>& b) {
  Vec<T> out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i)
    for (Index j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
  return out;
}

template <typename T>
Mat<T> naive_kron(const Mat<T>& a, const Mat<T>& b) {
  Mat<T> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index k = 0; k < b.rows(); ++k)
        for (Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

/// Exact l0 solve by enumerating every support of size s (lexicographic order)
/// and keeping the least-squares fit with the smallest residual. Stops at the
/// first support that explains y to round-off.
template <typename T>
SparseEstimate<T> exhaustive_l0(const Mat<T>& h, const Vec<T>& y, Index s) {
  const Index n = h.cols();
  std::vector<Index> pick(static_cast<std::size_t>(s));
  for (Index k = 0; k < s; ++k) pick[static_cast<std::size_t>(k)] = k;
  double best = std::numeric_limits<double>::infinity();
  SparseEstimate<T> est;
  est.x_full = Vec<T>::Zero(n);
  Mat<T> sub(h.rows(), s);
  while (true) {
    for (Index k = 0; k < s; ++k) sub.col(k) = h.col(pick[static_cast<std::size_t>(k)]);
    const Vec<T> c = sub.colPivHouseholderQr().solve(y);
    const double res = (y - sub * c).norm();
    if (res < best) {
      best = res;
      est.x_full.setZero();
      for (Index k = 0; k < s; ++k) est.x_full[pick[static_cast<std::size_t>(k)]] = c[k];
      est.support = pick;
      if (res <= 1e-12 * y.norm()) break;
    }
    Index k = s - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == n - s + k) --k;
    if (k < 0) break;
    ++pick[static_cast<std::size_t>(k)];
    for (Index j = k + 1; j < s; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return est;
}

}  // namespace kronsr::testing
