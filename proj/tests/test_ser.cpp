#include <kronsr/errors.hpp>
#include <kronsr/irs_channel.hpp>
#include <kronsr/ser.hpp>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "ser_oracle.hpp"
#include "test_util.hpp"

#include <bit>
#include <cmath>

using namespace kronsr;

namespace {

std::vector<DenseMatrix> default_channels(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SystemGeometry g;
  const auto ch = draw_channel(g, rng);
  const auto p = draw_protocol(g, ProtocolConfig{}, rng);
  return true_cascaded(ch, p);
}

}  // namespace

TEST(Qam8, UnitEnergyGrayLabelsAndSelfDetection) {
  const auto& pts = qam8_points();
  double e = 0.0;
  for (const auto& p : pts) e += std::norm(p);
  EXPECT_NEAR(e / 8.0, 1.0, 1e-14);
  const auto& lab = qam8_labels();
  const double dmin = 2.0 / std::sqrt(6.0);
  for (int a = 0; a < 8; ++a) {
    EXPECT_EQ(qam8_detect(pts[static_cast<std::size_t>(a)]), a);
    for (int b = a + 1; b < 8; ++b)
      if (std::abs(std::abs(pts[a] - pts[b]) - dmin) < 1e-12)
        EXPECT_EQ(std::popcount(lab[a] ^ lab[b]), 1) << a << " " << b;
  }
}

TEST(Ser, PerfectCsiNoiselessLimitIsErrorFree) {
  const auto hs = default_channels(1);
  std::mt19937_64 rng(2);
  const auto r = simulate_ser(hs, hs, 200.0, 20000, rng);
  EXPECT_EQ(r.errors, 0u);
  EXPECT_EQ(r.symbols, 20000u);
  for (Index s : r.streams) EXPECT_EQ(s, 1);  // single MS AoD: rank-one cascade
}

TEST(Ser, PerfectCsiMatchesIndependentOracle) {
  for (double snr : {-15.0, -10.0}) {
    const auto hs = default_channels(3);
    std::mt19937_64 a(4), b(5);
    const std::uint64_t n = 200000;
    const auto r = simulate_ser(hs, hs, snr, n, a);
    const auto o = kronsr::testing::perfect_csi_oracle(hs, snr, n, SerOptions{}.rank_tol, b);
    const double p1 = r.ser, p2 = static_cast<double>(o.err) / static_cast<double>(o.n);
    const double pm = 0.5 * (p1 + p2);
    const double sd = std::sqrt(pm * (1 - pm) * (1.0 / static_cast<double>(r.symbols) + 1.0 / static_cast<double>(o.n)));
    EXPECT_GT(p1, 1e-3) << "SNR too high for a meaningful comparison";
    EXPECT_LE(std::abs(p1 - p2), 3.0 * sd) << "snr " << snr << ": " << p1 << " vs " << p2;
  }
}

TEST(Ser, RandomEstimateIsNearUniformGuessing) {
  const auto hs = default_channels(6);
  std::mt19937_64 rng(7);
  std::vector<DenseMatrix> est;
  for (const auto& h : hs) est.push_back(kronsr::testing::random_matrix<cdouble>(h.rows(), h.cols(), rng));
  const auto r = simulate_ser(hs, est, 30.0, 100000, rng);
  EXPECT_NEAR(r.ser, 7.0 / 8.0, 0.05 * 7.0 / 8.0);
}

TEST(Ser, ZeroEstimateIsFlagged) {
  const auto hs = default_channels(8);
  std::vector<DenseMatrix> est(hs.size(), DenseMatrix::Zero(hs[0].rows(), hs[0].cols()));
  std::mt19937_64 rng(9);
  const auto r = simulate_ser(hs, est, 30.0, 80000, rng);
  EXPECT_TRUE(r.rank_deficient);
  EXPECT_NEAR(r.ser, 7.0 / 8.0, 0.01);
}

TEST(Ser, RejectsBadInput) {
  const auto hs = default_channels(10);
  std::mt19937_64 rng(11);
  EXPECT_THROW(simulate_ser(hs, {hs[0]}, 10.0, 100, rng), DimensionError);
  EXPECT_THROW(simulate_ser(hs, hs, 10.0, 0, rng), InvalidInput);
  std::vector<DenseMatrix> zero(hs.size(), DenseMatrix::Zero(hs[0].rows(), hs[0].cols()));
  EXPECT_THROW(simulate_ser(zero, hs, 10.0, 100, rng), InvalidInput);
}
