#include <kronsr/kron_linalg.hpp>

#include <kronsr/errors.hpp>

#include <Eigen/SVD>

#include <cmath>
#include <string>
#include <type_traits>

namespace kronsr {
namespace {

double modulus(double v) { return std::abs(v); }
double modulus(const cdouble& v) { return std::abs(v); }

double unit_phase_of(double v) { return v < 0.0 ? -1.0 : 1.0; }
cdouble unit_phase_of(const cdouble& v) {
  const double a = std::abs(v);
  return a == 0.0 ? cdouble(1.0, 0.0) : v / a;
}

double conj_of(double v) { return v; }
cdouble conj_of(const cdouble& v) { return std::conj(v); }

}  // namespace

template <typename T>
Vec<T> kron_vectors(std::span<const Vec<T>> factors) {
  if (factors.empty()) throw InvalidInput("kron_vectors: empty factor list");
  Vec<T> out = factors[0];
  for (std::size_t k = 1; k < factors.size(); ++k) {
    const Vec<T>& b = factors[k];
    Vec<T> next(out.size() * b.size());
    for (Index i = 0; i < out.size(); ++i) next.segment(i * b.size(), b.size()) = out[i] * b;
    out = std::move(next);
  }
  return out;
}

template <typename T>
Mat<T> kron_matrices(std::span<const Mat<T>> factors) {
  if (factors.empty()) throw InvalidInput("kron_matrices: empty factor list");
  Mat<T> out = factors[0];
  for (std::size_t k = 1; k < factors.size(); ++k) {
    const Mat<T>& b = factors[k];
    Mat<T> next(out.rows() * b.rows(), out.cols() * b.cols());
    for (Index j = 0; j < out.cols(); ++j)
      for (Index i = 0; i < out.rows(); ++i)
        next.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = out(i, j) * b;
    out = std::move(next);
  }
  return out;
}

template <typename T>
Vec<T> kron_matvec(const KroneckerDictionary<T>& dict, const FactorChain<T>& x) {
  if (dict.size() != x.size() || dict.size() == 0)
    throw DimensionError("kron_matvec: dictionary has " + std::to_string(dict.size()) +
                         " factors, chain has " + std::to_string(x.size()));
  std::vector<Vec<T>> images;
  images.reserve(dict.size());
  for (std::size_t i = 0; i < dict.size(); ++i) {
    if (dict.factors[i].cols() != x.factors[i].size())
      throw DimensionError("kron_matvec: factor " + std::to_string(i) + " has " +
                           std::to_string(dict.factors[i].cols()) + " columns but x_i has length " +
                           std::to_string(x.factors[i].size()));
    images.push_back(dict.factors[i] * x.factors[i]);
  }
  return kron_vectors(images);
}

template <typename T>
Vec<T> kron_apply(const KroneckerDictionary<T>& dict, const Vec<T>& x) {
  if (dict.size() == 0) throw InvalidInput("kron_apply: empty dictionary");
  if (x.size() != dict.cols())
    throw DimensionError("kron_apply: x has length " + std::to_string(x.size()) +
                         ", dictionary has " + std::to_string(dict.cols()) + " columns");
  // The fastest-varying mode is processed first; transposing after each product
  // moves the processed mode to the slowest position, so after I rounds the
  // original mode order is restored.
  Vec<T> cur = x;
  for (std::size_t k = dict.size(); k-- > 0;) {
    const Mat<T>& h = dict.factors[k];
    const Index rest = cur.size() / h.cols();
    Eigen::Map<const Mat<T>> xm(cur.data(), h.cols(), rest);
    Mat<T> prod = (h * xm).transpose();
    cur = Eigen::Map<const Vec<T>>(prod.data(), prod.size());
  }
  return cur;
}

template <typename T>
Mat<T> vec_to_matrix(const Vec<T>& y, Index inner_rows, Index outer_cols) {
  if (inner_rows <= 0 || outer_cols <= 0 || y.size() != inner_rows * outer_cols)
    throw DimensionError("vec_to_matrix: length " + std::to_string(y.size()) + " != " +
                         std::to_string(inner_rows) + " x " + std::to_string(outer_cols));
  return Eigen::Map<const Mat<T>>(y.data(), inner_rows, outer_cols);
}

template <typename T>
T normalize_phase(Vec<T>& v) {
  if (v.size() == 0) return T(1);
  Index best = 0;
  double best_mod = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double m = modulus(v[i]);
    if (m > best_mod) {
      best_mod = m;
      best = i;
    }
  }
  const T p = unit_phase_of(v[best]);
  v *= conj_of(p);
  if constexpr (!std::is_same_v<T, double>) v[best] = T(std::abs(v[best]), 0.0);
  return p;
}

template <typename T>
RankOneApprox<T> rank_one_approx(const Mat<T>& m) {
  if (m.size() == 0) throw DimensionError("rank_one_approx: empty matrix");
  const double norm = m.norm();
  if (!(norm > 0.0)) throw InvalidInput("rank_one_approx: all-zero matrix has no direction");
  if (!std::isfinite(norm)) throw InvalidInput("rank_one_approx: non-finite entries");

  Vec<T> right;
  if (m.cols() == 1) {
    right = Vec<T>::Ones(1);
  } else if (m.rows() == 1) {
    right = m.row(0).transpose();
    right /= right.norm();
  } else {
    Eigen::JacobiSVD<Mat<T>> svd(m, Eigen::ComputeThinV);
    // m = sum_k s_k u_k v_k^H, so m ~ (s_1 u_1) (conj v_1)^T.
    right = svd.matrixV().col(0).conjugate();
  }
  normalize_phase(right);

  RankOneApprox<T> out;
  out.left = m * right.conjugate();
  out.sigma = out.left.norm();
  out.residual_fro = (m - out.left * right.transpose()).norm();
  out.right_unit = std::move(right);
  return out;
}

template <typename T>
FactorChain<T> decompose_chain(const Vec<T>& y, const std::vector<Index>& dims) {
  if (dims.size() < 2) throw InvalidInput("decompose_chain: need at least two factors");
  for (Index d : dims)
    if (d <= 0) throw DimensionError("decompose_chain: non-positive factor dimension");
  if (product(dims) != y.size())
    throw DimensionError("decompose_chain: product of dims " + std::to_string(product(dims)) +
                         " != measurement length " + std::to_string(y.size()));
  if (!(y.norm() > 0.0)) throw InvalidInput("decompose_chain: zero measurement");

  FactorChain<T> chain;
  chain.factors.reserve(dims.size());
  Vec<T> rest = y;
  Index rest_len = y.size();
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    rest_len /= dims[i];
    Mat<T> shaped = vec_to_matrix(rest, rest_len, dims[i]);
    RankOneApprox<T> r1 = rank_one_approx(shaped);
    chain.steps.push_back({shaped.rows(), shaped.cols(), r1.sigma, r1.residual_fro});
    chain.factors.push_back(std::move(r1.right_unit));
    rest = std::move(r1.left);
  }
  chain.factors.push_back(std::move(rest));
  return chain;
}

#define KRONSR_INSTANTIATE(T)                                                              \
  template Vec<T> kron_vectors<T>(std::span<const Vec<T>>);                                \
  template Mat<T> kron_matrices<T>(std::span<const Mat<T>>);                               \
  template Vec<T> kron_matvec<T>(const KroneckerDictionary<T>&, const FactorChain<T>&);    \
  template Vec<T> kron_apply<T>(const KroneckerDictionary<T>&, const Vec<T>&);             \
  template Mat<T> vec_to_matrix<T>(const Vec<T>&, Index, Index);                           \
  template T normalize_phase<T>(Vec<T>&);                                                  \
  template RankOneApprox<T> rank_one_approx<T>(const Mat<T>&);                             \
  template FactorChain<T> decompose_chain<T>(const Vec<T>&, const std::vector<Index>&);

KRONSR_INSTANTIATE(double)
KRONSR_INSTANTIATE(cdouble)

#undef KRONSR_INSTANTIATE

}  // namespace kronsr
