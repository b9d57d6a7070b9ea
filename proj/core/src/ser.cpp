#include <kronsr/ser.hpp>

#include <kronsr/errors.hpp>

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kronsr {
namespace {

cdouble complex_normal(std::mt19937_64& rng, double sd) {
  std::normal_distribution<double> nd(0.0, sd * std::sqrt(0.5));
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

}  // namespace

const std::array<cdouble, 8>& qam8_points() {
  static const std::array<cdouble, 8> pts = [] {
    const double d = 1.0 / std::sqrt(6.0);  // mean of (1,1,9,9) x (1,1) levels is 6
    const double i_levels[4] = {-3.0, -1.0, 1.0, 3.0};
    const double q_levels[2] = {-1.0, 1.0};
    std::array<cdouble, 8> p{};
    for (int i = 0; i < 4; ++i)
      for (int q = 0; q < 2; ++q) p[static_cast<std::size_t>(2 * i + q)] = {d * i_levels[i], d * q_levels[q]};
    return p;
  }();
  return pts;
}

const std::array<unsigned, 8>& qam8_labels() {
  // Gray code on the in-phase levels (00, 01, 11, 10), one bit for quadrature.
  static const std::array<unsigned, 8> labels = [] {
    const unsigned gray[4] = {0u, 1u, 3u, 2u};
    std::array<unsigned, 8> l{};
    for (unsigned i = 0; i < 4; ++i)
      for (unsigned q = 0; q < 2; ++q) l[2 * i + q] = (gray[i] << 1) | q;
    return l;
  }();
  return labels;
}

int qam8_detect(cdouble z) {
  const auto& pts = qam8_points();
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int b = 0; b < 8; ++b) {
    const double d = std::norm(z - pts[static_cast<std::size_t>(b)]);
    if (d < best_d) {
      best_d = d;
      best = b;
    }
  }
  return best;
}

double ser_noise_variance(const DenseMatrix& h_true, double snr_db) {
  const double p = h_true.squaredNorm() / static_cast<double>(h_true.rows() * h_true.cols());
  return p / std::pow(10.0, snr_db / 10.0);
}

SerResult simulate_ser(const std::vector<DenseMatrix>& true_channels,
                       const std::vector<DenseMatrix>& est_channels, double snr_db,
                       std::uint64_t n_symbols, std::mt19937_64& rng, const SerOptions& opt) {
  if (true_channels.empty()) throw InvalidInput("simulate_ser: no channels");
  if (true_channels.size() != est_channels.size())
    throw DimensionError("simulate_ser: " + std::to_string(true_channels.size()) + " true vs " +
                         std::to_string(est_channels.size()) + " estimated channels");
  if (n_symbols < 1) throw InvalidInput("simulate_ser: need at least one symbol");
  if (!std::isfinite(snr_db)) throw InvalidInput("simulate_ser: SNR must be finite");
  if (!(opt.rank_tol > 0.0 && opt.rank_tol < 1.0))
    throw InvalidInput("simulate_ser: rank_tol must lie in (0, 1)");

  const auto& pts = qam8_points();
  std::uniform_int_distribution<int> pick(0, 7);
  const std::uint64_t k_count = true_channels.size();

  SerResult res;
  for (std::uint64_t k = 0; k < k_count; ++k) {
    const DenseMatrix& h = true_channels[k];
    const DenseMatrix& he = est_channels[k];
    if (h.rows() != he.rows() || h.cols() != he.cols())
      throw DimensionError("simulate_ser: channel " + std::to_string(k) + " shape mismatch");
    if (!(h.squaredNorm() > 0.0))
      throw InvalidInput("simulate_ser: true channel " + std::to_string(k) + " is zero");

    const Index t = h.cols();
    const double sd = std::sqrt(ser_noise_variance(h, snr_db));
    const std::uint64_t n_k = n_symbols / k_count + (k < n_symbols % k_count ? 1 : 0);
    if (n_k == 0) {
      res.streams.push_back(0);
      continue;
    }

    Index r = 0;
    DenseMatrix precoder, equalizer;
    if (he.allFinite() && he.squaredNorm() > 0.0) {
      Eigen::JacobiSVD<DenseMatrix> svd(he, Eigen::ComputeFullV);
      const auto& s = svd.singularValues();
      for (Index i = 0; i < s.size(); ++i)
        if (s[i] > opt.rank_tol * s[0]) ++r;
      r = std::min(r, t);
      precoder = svd.matrixV().leftCols(r) / std::sqrt(static_cast<double>(r));
      equalizer = (he * precoder).completeOrthogonalDecomposition().pseudoInverse();
    } else {
      res.rank_deficient = true;
    }
    res.streams.push_back(r);

    if (r == 0) {
      // No usable estimate: the equalizer output is zero for every symbol.
      const int guess = qam8_detect(cdouble(0.0));
      for (std::uint64_t n = 0; n < n_k; ++n) {
        const int sent = pick(rng);
        if (sent != guess) ++res.errors;
      }
      res.symbols += n_k;
      continue;
    }

    const Index uses = static_cast<Index>((n_k + static_cast<std::uint64_t>(r) - 1) / static_cast<std::uint64_t>(r));
    Eigen::MatrixXi sent(r, uses);
    DenseMatrix s(r, uses);
    for (Index c = 0; c < uses; ++c)
      for (Index i = 0; i < r; ++i) {
        sent(i, c) = pick(rng);
        s(i, c) = pts[static_cast<std::size_t>(sent(i, c))];
      }
    DenseMatrix y = h * (precoder * s);
    for (Index j = 0; j < y.size(); ++j) y.data()[j] += complex_normal(rng, sd);
    const DenseMatrix z = equalizer * y;

    // Column-major order; only the first n_k slots carry counted symbols.
    std::uint64_t counted = 0;
    for (Index c = 0; c < uses && counted < n_k; ++c)
      for (Index i = 0; i < r && counted < n_k; ++i, ++counted)
        if (qam8_detect(z(i, c)) != sent(i, c)) ++res.errors;
    res.symbols += n_k;
  }
  res.ser = static_cast<double>(res.errors) / static_cast<double>(res.symbols);
  return res;
}

}  // namespace kronsr
