#include <kronsr/irs_channel.hpp>

#include <kronsr/errors.hpp>
#include <kronsr/kron_linalg.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>

namespace kronsr {
namespace {

cdouble complex_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

void check_index(Index idx, Index n, const char* what) {
  if (idx < 0 || idx >= n)
    throw InvalidInput(std::string("channel: ") + what + " grid index " + std::to_string(idx) +
                       " outside [0, " + std::to_string(n) + ")");
}

}  // namespace

void SystemGeometry::validate() const {
  if (R < 1 || T < 1 || L < 1 || N < 1 || P_BS < 1 || P_MS < 1)
    throw InvalidInput("geometry: R, T, L, N, P_BS and P_MS must all be positive");
}

void ProtocolConfig::validate() const {
  if (K_I < 1 || K_P < 1) throw InvalidInput("protocol: K_I and K_P must be positive");
}

DenseVector GroundTruthFactors::assembled() const {
  const std::vector<DenseVector> f{g_l, g_t_conj, g_r};
  return kron_vectors<cdouble>(std::span<const DenseVector>(f));
}

DenseVector steering_vector(Index q, double psi) {
  if (q < 1) throw InvalidInput("steering_vector: Q must be >= 1");
  const double u = std::numbers::pi * std::cos(psi);
  const double scale = 1.0 / std::sqrt(static_cast<double>(q));
  DenseVector a(q);
  for (Index i = 0; i < q; ++i) a[i] = std::polar(scale, u * static_cast<double>(i));
  return a;
}

std::vector<double> grid_angles(Index n) {
  if (n < 1) throw InvalidInput("grid_angles: N must be >= 1");
  std::vector<double> psi(static_cast<std::size_t>(n));
  for (Index k = 1; k <= n; ++k) {
    const double c = 2.0 * static_cast<double>(k) / static_cast<double>(n) - 1.0;
    psi[static_cast<std::size_t>(k - 1)] = std::acos(std::clamp(c, -1.0, 1.0));
  }
  return psi;
}

DenseMatrix bem_dictionary(Index q, Index n) {
  const auto psi = grid_angles(n);
  DenseMatrix a(q, n);
  for (Index j = 0; j < n; ++j) a.col(j) = steering_vector(q, psi[static_cast<std::size_t>(j)]);
  return a;
}

DenseMatrix khatri_rao(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols())
    throw DimensionError("khatri_rao: column counts differ (" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.cols()) + ")");
  DenseMatrix out(a.rows() * b.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) out.col(j).segment(i * b.rows(), b.rows()) = a(i, j) * b.col(j);
  return out;
}

ChannelRealization channel_from_paths(const SystemGeometry& geometry, std::vector<Index> irs_aoa,
                                      Index ms_aod, std::vector<Index> bs_aoa, Index irs_aod,
                                      std::vector<cdouble> beta_ms, std::vector<cdouble> beta_bs) {
  geometry.validate();
  const auto& g = geometry;
  if (static_cast<Index>(irs_aoa.size()) != g.P_MS || static_cast<Index>(beta_ms.size()) != g.P_MS)
    throw DimensionError("channel: expected " + std::to_string(g.P_MS) + " MS-IRS paths");
  if (static_cast<Index>(bs_aoa.size()) != g.P_BS || static_cast<Index>(beta_bs.size()) != g.P_BS)
    throw DimensionError("channel: expected " + std::to_string(g.P_BS) + " IRS-BS paths");
  for (Index i : irs_aoa) check_index(i, g.N, "IRS AoA");
  for (Index i : bs_aoa) check_index(i, g.N, "BS AoA");
  check_index(ms_aod, g.N, "MS AoD");
  check_index(irs_aod, g.N, "IRS AoD");

  const auto psi = grid_angles(g.N);
  auto angle = [&](Index i) { return psi[static_cast<std::size_t>(i)]; };

  ChannelRealization ch;
  const double s_ms = std::sqrt(static_cast<double>(g.L * g.T) / static_cast<double>(g.P_MS));
  const double s_bs = std::sqrt(static_cast<double>(g.R * g.L) / static_cast<double>(g.P_BS));

  ch.h_ms = DenseMatrix::Zero(g.L, g.T);
  const DenseVector a_t = steering_vector(g.T, angle(ms_aod));
  for (Index p = 0; p < g.P_MS; ++p)
    ch.h_ms += (s_ms * beta_ms[static_cast<std::size_t>(p)]) *
               steering_vector(g.L, angle(irs_aoa[static_cast<std::size_t>(p)])) * a_t.adjoint();

  ch.h_bs = DenseMatrix::Zero(g.R, g.L);
  const DenseVector a_l = steering_vector(g.L, angle(irs_aod));
  for (Index p = 0; p < g.P_BS; ++p)
    ch.h_bs += (s_bs * beta_bs[static_cast<std::size_t>(p)]) *
               steering_vector(g.R, angle(bs_aoa[static_cast<std::size_t>(p)])) * a_l.adjoint();

  ch.irs_aoa = std::move(irs_aoa);
  ch.ms_aod = ms_aod;
  ch.bs_aoa = std::move(bs_aoa);
  ch.irs_aod = irs_aod;
  ch.beta_ms = std::move(beta_ms);
  ch.beta_bs = std::move(beta_bs);
  return ch;
}

ChannelRealization draw_channel(const SystemGeometry& geometry, std::mt19937_64& rng) {
  geometry.validate();
  std::uniform_int_distribution<Index> grid(0, geometry.N - 1);
  std::vector<Index> irs_aoa, bs_aoa;
  std::vector<cdouble> beta_ms, beta_bs;
  for (Index p = 0; p < geometry.P_MS; ++p) irs_aoa.push_back(grid(rng));
  const Index ms_aod = grid(rng);
  for (Index p = 0; p < geometry.P_BS; ++p) bs_aoa.push_back(grid(rng));
  const Index irs_aod = grid(rng);
  for (Index p = 0; p < geometry.P_MS; ++p) beta_ms.push_back(complex_normal(rng));
  for (Index p = 0; p < geometry.P_BS; ++p) beta_bs.push_back(complex_normal(rng));
  return channel_from_paths(geometry, std::move(irs_aoa), ms_aod, std::move(bs_aoa), irs_aod,
                            std::move(beta_ms), std::move(beta_bs));
}

DenseMatrix cascaded_channel(const ChannelRealization& ch, const DenseVector& theta) {
  if (theta.size() != ch.h_bs.cols() || theta.size() != ch.h_ms.rows())
    throw DimensionError("cascaded_channel: theta has length " + std::to_string(theta.size()) +
                         ", channel has " + std::to_string(ch.h_bs.cols()) + " IRS elements");
  return ch.h_bs * theta.asDiagonal() * ch.h_ms;
}

double irs_amplitude(const SystemGeometry& geometry, IrsAmplitude a) {
  const Index n = a == IrsAmplitude::InvSqrtN ? geometry.N : geometry.L;
  return 1.0 / std::sqrt(static_cast<double>(n));
}

PilotProtocol draw_protocol(const SystemGeometry& geometry, const ProtocolConfig& cfg,
                            std::mt19937_64& rng) {
  geometry.validate();
  cfg.validate();
  std::bernoulli_distribution coin(0.5);
  const double q = 1.0 / std::sqrt(2.0);
  PilotProtocol p;
  p.x.resize(geometry.T, cfg.K_P);
  for (Index c = 0; c < cfg.K_P; ++c)
    for (Index r = 0; r < geometry.T; ++r) {
      const bool re = coin(rng);
      const bool im = coin(rng);
      p.x(r, c) = cdouble(re ? q : -q, im ? q : -q);
    }
  const double amp = irs_amplitude(geometry, cfg.amplitude);
  p.theta.resize(geometry.L, cfg.K_I);
  for (Index c = 0; c < cfg.K_I; ++c)
    for (Index r = 0; r < geometry.L; ++r) p.theta(r, c) = coin(rng) ? amp : -amp;
  return p;
}

std::vector<DenseMatrix> received_pilots(const ChannelRealization& ch, const PilotProtocol& protocol,
                                         double sigma2, std::mt19937_64& rng) {
  if (!(sigma2 >= 0.0)) throw InvalidInput("received_pilots: sigma2 must be >= 0");
  if (protocol.x.rows() != ch.h_ms.cols())
    throw DimensionError("received_pilots: pilot matrix has " + std::to_string(protocol.x.rows()) +
                         " rows, channel has " + std::to_string(ch.h_ms.cols()) + " MS antennas");
  const double sd = std::sqrt(sigma2);
  std::vector<DenseMatrix> out;
  out.reserve(static_cast<std::size_t>(protocol.k_i()));
  for (Index k = 0; k < protocol.k_i(); ++k) {
    DenseMatrix y = cascaded_channel(ch, protocol.theta.col(k)) * protocol.x;
    if (sd > 0.0)
      for (Index j = 0; j < y.size(); ++j) y.data()[j] += sd * complex_normal(rng);
    out.push_back(std::move(y));
  }
  return out;
}

DenseMatrix irs_dictionary(const PilotProtocol& protocol, const SystemGeometry& geometry) {
  if (protocol.theta.rows() != geometry.L)
    throw DimensionError("irs_dictionary: theta has " + std::to_string(protocol.theta.rows()) +
                         " rows, geometry has L = " + std::to_string(geometry.L));
  const DenseMatrix a_l = bem_dictionary(geometry.L, geometry.N);
  const DenseMatrix kr = khatri_rao(a_l.transpose(), a_l.adjoint());  // N^2 x L
  return (protocol.theta.transpose() * kr.transpose()).leftCols(geometry.N);
}

MeasurementModel build_measurement_model(const PilotProtocol& protocol,
                                         const SystemGeometry& geometry,
                                         const std::vector<DenseMatrix>& received, double sigma2) {
  geometry.validate();
  if (static_cast<Index>(received.size()) != protocol.k_i())
    throw DimensionError("build_measurement_model: expected " + std::to_string(protocol.k_i()) +
                         " received blocks, got " + std::to_string(received.size()));
  if (protocol.x.rows() != geometry.T)
    throw DimensionError("build_measurement_model: pilot rows differ from T");
  for (const auto& y : received)
    if (y.rows() != geometry.R || y.cols() != protocol.k_p())
      throw DimensionError("build_measurement_model: each Y_k must be R x K_P");

  MeasurementModel m;
  m.phi_l = irs_dictionary(protocol, geometry);
  m.phi_t = protocol.x.transpose() * bem_dictionary(geometry.T, geometry.N).conjugate();
  m.phi_r = bem_dictionary(geometry.R, geometry.N);
  const Index block = geometry.R * protocol.k_p();
  m.y_tilde.resize(block * protocol.k_i());
  for (Index k = 0; k < protocol.k_i(); ++k)
    m.y_tilde.segment(k * block, block) =
        Eigen::Map<const DenseVector>(received[static_cast<std::size_t>(k)].data(), block);
  m.sigma2 = sigma2;
  return m;
}

GroundTruthFactors ground_truth_factors(const ChannelRealization& ch,
                                        const SystemGeometry& geometry) {
  geometry.validate();
  const auto& g = geometry;
  if (static_cast<Index>(ch.irs_aoa.size()) != g.P_MS || static_cast<Index>(ch.beta_ms.size()) != g.P_MS ||
      static_cast<Index>(ch.bs_aoa.size()) != g.P_BS || static_cast<Index>(ch.beta_bs.size()) != g.P_BS)
    throw DimensionError("ground_truth_factors: path lists do not match the geometry");
  for (Index i : ch.irs_aoa) check_index(i, g.N, "IRS AoA");
  for (Index i : ch.bs_aoa) check_index(i, g.N, "BS AoA");
  check_index(ch.ms_aod, g.N, "MS AoD");
  check_index(ch.irs_aod, g.N, "IRS AoD");

  GroundTruthFactors f;
  f.g_l = DenseVector::Zero(g.N);
  f.g_t_conj = DenseVector::Zero(g.N);
  f.g_r = DenseVector::Zero(g.N);

  const double s_ms = std::sqrt(static_cast<double>(g.L * g.T) / static_cast<double>(g.P_MS));
  const double s_bs = std::sqrt(static_cast<double>(g.R * g.L) / static_cast<double>(g.P_BS));
  for (Index p = 0; p < g.P_BS; ++p)
    f.g_r[ch.bs_aoa[static_cast<std::size_t>(p)]] += s_bs * ch.beta_bs[static_cast<std::size_t>(p)];
  f.g_t_conj[ch.ms_aod] = 1.0;
  // a_L(phi_BS)^H diag(theta) a_L(phi_MS,p) is a function of the grid index
  // difference only, which selects column (n_d - n_a) mod N of Phi_L.
  for (Index p = 0; p < g.P_MS; ++p) {
    const Index j = ((ch.irs_aod - ch.irs_aoa[static_cast<std::size_t>(p)]) % g.N + g.N) % g.N;
    f.g_l[j] += s_ms * ch.beta_ms[static_cast<std::size_t>(p)];
  }
  return f;
}

std::vector<DenseMatrix> reconstruct_cascaded(const DenseVector& x, const SystemGeometry& geometry,
                                              const PilotProtocol& protocol) {
  geometry.validate();
  const Index n = geometry.N;
  if (x.size() != n * n * n)
    throw DimensionError("reconstruct_cascaded: coefficient vector has length " +
                         std::to_string(x.size()) + ", expected N^3 = " + std::to_string(n * n * n));
  const DenseMatrix phi_l = irs_dictionary(protocol, geometry);
  const DenseMatrix a_r = bem_dictionary(geometry.R, n);
  const DenseMatrix a_t = bem_dictionary(geometry.T, n);

  // x[(jl * N + jt) * N + jr]; for fixed jl the N^2 block is Z[jr, jt].
  std::vector<DenseMatrix> out;
  out.reserve(static_cast<std::size_t>(protocol.k_i()));
  for (Index k = 0; k < protocol.k_i(); ++k) {
    DenseMatrix m = DenseMatrix::Zero(n, n);
    for (Index jl = 0; jl < n; ++jl) {
      const cdouble w = phi_l(k, jl);
      if (w == cdouble(0.0)) continue;
      m += w * Eigen::Map<const DenseMatrix>(x.data() + jl * n * n, n, n);
    }
    out.push_back(a_r * m * a_t.adjoint());
  }
  return out;
}

std::vector<DenseMatrix> true_cascaded(const ChannelRealization& ch, const PilotProtocol& protocol) {
  std::vector<DenseMatrix> out;
  out.reserve(static_cast<std::size_t>(protocol.k_i()));
  for (Index k = 0; k < protocol.k_i(); ++k) out.push_back(cascaded_channel(ch, protocol.theta.col(k)));
  return out;
}

ChannelInstance simulate_channel_instance(const SystemGeometry& geometry,
                                          const ProtocolConfig& protocol_cfg, double snr_db,
                                          std::mt19937_64& rng, DenseVector* y_clean) {
  if (!std::isfinite(snr_db)) throw InvalidInput("simulate_channel_instance: SNR must be finite");
  ChannelInstance inst;
  inst.geometry = geometry;
  inst.protocol_config = protocol_cfg;
  inst.channel = draw_channel(geometry, rng);
  inst.protocol = draw_protocol(geometry, protocol_cfg, rng);

  // Noiseless pass fixes the per-entry noise variance for the requested SNR,
  // then the noisy blocks reuse the same clean signal.
  const auto clean = received_pilots(inst.channel, inst.protocol, 0.0, rng);
  double energy = 0.0;
  Index count = 0;
  for (const auto& y : clean) {
    energy += y.squaredNorm();
    count += y.size();
  }
  const double sigma2 = energy / static_cast<double>(count) / std::pow(10.0, snr_db / 10.0);
  auto noisy = clean;
  const double sd = std::sqrt(sigma2);
  for (auto& y : noisy)
    for (Index j = 0; j < y.size(); ++j) y.data()[j] += sd * complex_normal(rng);

  inst.model = build_measurement_model(inst.protocol, geometry, noisy, sigma2);
  if (y_clean) *y_clean = build_measurement_model(inst.protocol, geometry, clean, 0.0).y_tilde;
  return inst;
}

UndersamplingInfo undersampling(const SystemGeometry& geometry, const ProtocolConfig& protocol) {
  geometry.validate();
  protocol.validate();
  UndersamplingInfo u;
  u.measurements = geometry.R * protocol.K_I * protocol.K_P;
  u.coefficients = geometry.N * geometry.N * geometry.N;
  u.ratio = static_cast<double>(u.measurements) / static_cast<double>(u.coefficients);
  return u;
}

}  // namespace kronsr
