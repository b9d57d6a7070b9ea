#include <kronsr/errors.hpp>
#include <kronsr/kron_linalg.hpp>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "test_util.hpp"

#include <cmath>

using namespace kronsr;
using kronsr::testing::naive_kron;
using kronsr::testing::random_matrix;
using kronsr::testing::random_vector;

template <typename T>
class KronTyped : public ::testing::Test {};
using Scalars = ::testing::Types<double, cdouble>;
TYPED_TEST_SUITE(KronTyped, Scalars);

TEST(KronVectors, SmallExample) {
  const std::vector<Vec<double>> f{Vec<double>{{1.0, 2.0}}, Vec<double>{{3.0, 4.0, 5.0}}};
  const Vec<double> k = kron_vectors(f);
  const Vec<double> expect{{3.0, 4.0, 5.0, 6.0, 8.0, 10.0}};
  EXPECT_EQ(k, expect);
}

TYPED_TEST(KronTyped, VectorsMatchNaiveOracle) {
  using T = TypeParam;
  std::mt19937_64 rng(11);
  const Vec<T> a = random_vector<T>(3, rng), b = random_vector<T>(4, rng), c = random_vector<T>(2, rng);
  const Vec<T> got = kron_vectors(std::vector<Vec<T>>{a, b, c});
  const Vec<T> want = naive_kron<T>(naive_kron<T>(a, b), c);
  EXPECT_LT((got - want).norm(), 1e-13 * want.norm());
}

TYPED_TEST(KronTyped, MatricesMatchNaiveOracle) {
  using T = TypeParam;
  std::mt19937_64 rng(12);
  const std::vector<Mat<T>> f{random_matrix<T>(2, 3, rng), random_matrix<T>(4, 2, rng),
                              random_matrix<T>(3, 3, rng)};
  const Mat<T> got = kron_matrices<T>(std::span<const Mat<T>>(f));
  const Mat<T> want = naive_kron<T>(naive_kron<T>(f[0], f[1]), f[2]);
  EXPECT_LT((got - want).norm(), 1e-13 * want.norm());
}

TYPED_TEST(KronTyped, MatvecAgreesWithMaterializedProduct) {
  using T = TypeParam;
  std::mt19937_64 rng(13);
  KroneckerDictionary<T> dict{{random_matrix<T>(3, 5, rng), random_matrix<T>(4, 4, rng),
                               random_matrix<T>(2, 3, rng)}};
  FactorChain<T> x;
  for (const auto& h : dict.factors) x.factors.push_back(random_vector<T>(h.cols(), rng));
  const Vec<T> want = materialize(dict) * kron_vectors(x.factors);
  EXPECT_LT((kron_matvec(dict, x) - want).norm(), 1e-12 * want.norm());
}

TYPED_TEST(KronTyped, ApplyHandlesNonKroneckerInput) {
  using T = TypeParam;
  std::mt19937_64 rng(14);
  KroneckerDictionary<T> dict{{random_matrix<T>(3, 5, rng), random_matrix<T>(4, 4, rng),
                               random_matrix<T>(2, 3, rng)}};
  const Vec<T> x = random_vector<T>(dict.cols(), rng);
  const Vec<T> want = materialize(dict) * x;
  EXPECT_LT((kron_apply(dict, x) - want).norm(), 1e-12 * want.norm());
}

TEST(KronMatvec, FactorCountMismatchThrows) {
  KroneckerDictionary<double> dict{{Mat<double>::Identity(2, 2), Mat<double>::Identity(2, 2)}};
  FactorChain<double> x;
  x.factors = {Vec<double>::Ones(2)};
  EXPECT_THROW(kron_matvec(dict, x), DimensionError);
  x.factors = {Vec<double>::Ones(2), Vec<double>::Ones(3)};
  EXPECT_THROW(kron_matvec(dict, x), DimensionError);
}

TEST(VecToMatrix, ColumnMajor) {
  const Vec<double> y{{1, 2, 3, 4, 5, 6}};
  const Mat<double> m = vec_to_matrix(y, 2, 3);
  EXPECT_EQ(m(0, 0), 1);
  EXPECT_EQ(m(1, 0), 2);
  EXPECT_EQ(m(0, 1), 3);
  EXPECT_EQ(m(1, 2), 6);
  EXPECT_THROW(vec_to_matrix(y, 4, 2), DimensionError);
}

TYPED_TEST(KronTyped, RankOneMatchesFullSvd) {
  using T = TypeParam;
  std::mt19937_64 rng(15);
  for (int rep = 0; rep < 20; ++rep) {
    const Mat<T> m = random_matrix<T>(7, 5, rng);
    const auto r1 = rank_one_approx(m);
    Eigen::JacobiSVD<Mat<T>> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    EXPECT_NEAR(r1.sigma, s[0], 1e-12 * s[0]);
    EXPECT_NEAR(r1.residual_fro, std::sqrt(s.tail(s.size() - 1).squaredNorm()), 1e-10 * s[0]);
    const Mat<T> best = s[0] * svd.matrixU().col(0) * svd.matrixV().col(0).adjoint();
    EXPECT_LT((r1.left * r1.right_unit.transpose() - best).norm(), 1e-10 * s[0]);
    EXPECT_NEAR(r1.right_unit.norm(), 1.0, 1e-12);
  }
}

TEST(RankOne, SingleRowAndColumn) {
  const Mat<double> row{{3.0, -4.0}};
  const auto r = rank_one_approx(row);
  EXPECT_NEAR(r.sigma, 5.0, 1e-14);
  EXPECT_NEAR(r.residual_fro, 0.0, 1e-14);
  EXPECT_NEAR(r.right_unit[1], 0.8, 1e-14);  // largest modulus entry made positive
  EXPECT_NEAR(r.left[0], -5.0, 1e-14);

  const Mat<double> col{{2.0}, {1.0}};
  const auto c = rank_one_approx(col);
  EXPECT_NEAR(c.sigma, std::sqrt(5.0), 1e-14);
  EXPECT_EQ(c.right_unit.size(), 1);
}

TEST(RankOne, ZeroMatrixThrows) {
  EXPECT_THROW(rank_one_approx(Mat<double>(Mat<double>::Zero(3, 3))), InvalidInput);
}

TEST(NormalizePhase, LargestEntryBecomesRealNonNegative) {
  Vec<cdouble> v{{cdouble(0.1, 0.2), cdouble(0.0, -2.0), cdouble(1.0, 1.0)}};
  const Vec<cdouble> orig = v;
  const cdouble p = normalize_phase(v);
  EXPECT_NEAR(std::abs(p), 1.0, 1e-15);
  EXPECT_NEAR(v[1].real(), 2.0, 1e-15);
  EXPECT_EQ(v[1].imag(), 0.0);
  EXPECT_LT((p * v - orig).norm(), 1e-15);
}

TEST(NormalizePhase, TieGoesToLowestIndex) {
  Vec<double> v{{-1.0, 1.0}};
  normalize_phase(v);
  EXPECT_EQ(v[0], 1.0);
  EXPECT_EQ(v[1], -1.0);
}

TYPED_TEST(KronTyped, DecomposeExactKroneckerIsLossless) {
  using T = TypeParam;
  std::mt19937_64 rng(16);
  const std::vector<Index> dims{4, 3, 5};
  std::vector<Vec<T>> f;
  for (Index d : dims) f.push_back(random_vector<T>(d, rng));
  const Vec<T> y = kron_vectors(f);
  const auto chain = decompose_chain(y, dims);
  ASSERT_EQ(chain.size(), 3u);
  ASSERT_EQ(chain.steps.size(), 2u);
  EXPECT_LT((kron_vectors(chain.factors) - y).norm(), 1e-12 * y.norm());
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    EXPECT_NEAR(chain.factors[i].norm(), 1.0, 1e-12);
    // factor i is f_i up to a scalar
    const T alpha = f[i].dot(chain.factors[i]) / f[i].squaredNorm();
    EXPECT_LT((chain.factors[i] - alpha * f[i]).norm(), 1e-10);
    EXPECT_LT(chain.steps[i].residual_fro, 1e-12 * y.norm());
  }
}

TEST(Decompose, SelectorVectorsKeepFactorOrder) {
  const std::vector<Index> dims{3, 4, 2};
  for (Index a = 0; a < 3; ++a)
    for (Index b = 0; b < 4; ++b)
      for (Index c = 0; c < 2; ++c) {
        Vec<double> y = Vec<double>::Zero(24);
        y[(a * 4 + b) * 2 + c] = 2.0;
        const auto chain = decompose_chain(y, dims);
        EXPECT_EQ(chain.factors[0], Vec<double>::Unit(3, a));
        EXPECT_EQ(chain.factors[1], Vec<double>::Unit(4, b));
        EXPECT_EQ(chain.factors[2], (2.0 * Vec<double>::Unit(2, c)).eval());
      }
}

TYPED_TEST(KronTyped, DecomposeIsScaleEquivariant) {
  using T = TypeParam;
  std::mt19937_64 rng(17);
  const std::vector<Index> dims{3, 4, 5};
  const Vec<T> y = random_vector<T>(60, rng);
  const auto base = decompose_chain(y, dims);
  const T alpha = std::is_same_v<T, double> ? T(2.5) : T(-1.5);
  const auto scaled = decompose_chain(Vec<T>(alpha * y), dims);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i)
    EXPECT_LT((scaled.factors[i] - base.factors[i]).norm(), 1e-10);
  EXPECT_LT((scaled.factors.back() - alpha * base.factors.back()).norm(),
            1e-10 * base.factors.back().norm());
}

TEST(Decompose, TwoFactorReassemblyIsBestRankOne) {
  std::mt19937_64 rng(18);
  const std::vector<Index> dims{6, 5};
  const Vec<double> y = random_vector<double>(30, rng);
  const auto chain = decompose_chain(y, dims);
  const double best = (kron_vectors(chain.factors) - y).norm();
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<Vec<double>> f = chain.factors;
    f[0] += 0.05 * random_vector<double>(6, rng);
    f[1] += 0.05 * random_vector<double>(5, rng);
    EXPECT_GE((kron_vectors(f) - y).norm(), best - 1e-12);
  }
}

TEST(Decompose, RejectsBadInput) {
  EXPECT_THROW(decompose_chain(Vec<double>(Vec<double>::Ones(12)), {12}), InvalidInput);
  EXPECT_THROW(decompose_chain(Vec<double>(Vec<double>::Ones(12)), {3, 5}), DimensionError);
  EXPECT_THROW(decompose_chain(Vec<double>(Vec<double>::Zero(12)), {3, 4}), InvalidInput);
}
