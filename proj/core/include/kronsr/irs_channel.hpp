#pragma once

// IRS-aided MIMO uplink: geometric channel generation on an angular grid,
// the pilot protocol, and the Kronecker-structured measurement model
//
//   y~ = (Phi_L (x) Phi_T (x) Phi_R)(g_L (x) conj(g_T) (x) g_R) + w~,
//
// where y~ stacks column-major vec(Y_k) for k = 1..K_I.

#include <kronsr/types.hpp>

#include <cstdint>
#include <random>
#include <vector>

namespace kronsr {

struct SystemGeometry {
  Index R = 16;    // BS antennas
  Index T = 6;     // MS antennas
  Index L = 256;   // IRS elements
  Index N = 18;    // angular grid size
  Index P_BS = 3;  // IRS-BS paths
  Index P_MS = 3;  // MS-IRS paths

  void validate() const;
};

/// IRS reflection amplitude c, with theta entries drawn from {-c, +c}.
enum class IrsAmplitude { InvSqrtN, InvSqrtL };

struct ProtocolConfig {
  Index K_I = 10;  // IRS configurations
  Index K_P = 4;   // pilot slots per configuration
  IrsAmplitude amplitude = IrsAmplitude::InvSqrtN;

  void validate() const;
};

/// Grid-index form of the path parameters; angles are psi_n of `grid_angles`.
struct ChannelRealization {
  DenseMatrix h_ms;  // L x T
  DenseMatrix h_bs;  // R x L

  std::vector<Index> irs_aoa;  // phi_MS,p   (P_MS entries)
  Index ms_aod = 0;            // alpha_MS
  std::vector<Index> bs_aoa;   // alpha_BS,p (P_BS entries)
  Index irs_aod = 0;           // phi_BS
  std::vector<cdouble> beta_ms;
  std::vector<cdouble> beta_bs;
};

struct PilotProtocol {
  DenseMatrix x;      // T x K_P pilot symbols
  DenseMatrix theta;  // L x K_I, column k is the k-th IRS configuration

  Index k_i() const { return theta.cols(); }
  Index k_p() const { return x.cols(); }
};

struct MeasurementModel {
  DenseMatrix phi_l;  // K_I x N
  DenseMatrix phi_t;  // K_P x N
  DenseMatrix phi_r;  // R x N
  DenseVector y_tilde;
  double sigma2 = 0.0;

  KroneckerDictionary<cdouble> dictionary() const { return {{phi_l, phi_t, phi_r}}; }
  std::vector<Index> row_dims() const { return {phi_l.rows(), phi_t.rows(), phi_r.rows()}; }
};

struct GroundTruthFactors {
  DenseVector g_l;
  DenseVector g_t_conj;
  DenseVector g_r;

  DenseVector assembled() const;
};

/// Everything needed to replay a channel-estimation trial.
struct ChannelInstance {
  SystemGeometry geometry;
  ProtocolConfig protocol_config;
  ChannelRealization channel;
  PilotProtocol protocol;
  MeasurementModel model;
};

/// a_Q(psi) = Q^-1/2 [1, e^{j pi cos psi}, ..., e^{j pi (Q-1) cos psi}]^T
DenseVector steering_vector(Index q, double psi);

/// psi_n = arccos(2n/N - 1), n = 1..N (returned 0-based).
std::vector<double> grid_angles(Index n);

/// Q x N matrix of steering vectors at the grid angles.
DenseMatrix bem_dictionary(Index q, Index n);

/// Column-wise Kronecker product: column j is a_j (x) b_j.
DenseMatrix khatri_rao(const DenseMatrix& a, const DenseMatrix& b);

ChannelRealization draw_channel(const SystemGeometry& geometry, std::mt19937_64& rng);

/// Builds H_MS and H_BS from grid indices and path gains.
ChannelRealization channel_from_paths(const SystemGeometry& geometry, std::vector<Index> irs_aoa,
                                      Index ms_aod, std::vector<Index> bs_aoa, Index irs_aod,
                                      std::vector<cdouble> beta_ms, std::vector<cdouble> beta_bs);

/// H_BS diag(theta) H_MS
DenseMatrix cascaded_channel(const ChannelRealization& ch, const DenseVector& theta);

double irs_amplitude(const SystemGeometry& geometry, IrsAmplitude a);

/// QPSK unit-modulus pilots and +-c IRS configurations.
PilotProtocol draw_protocol(const SystemGeometry& geometry, const ProtocolConfig& cfg,
                            std::mt19937_64& rng);

/// Y_k = H_BS diag(theta_k) H_MS X + W_k with W_k ~ CN(0, sigma2).
std::vector<DenseMatrix> received_pilots(const ChannelRealization& ch, const PilotProtocol& protocol,
                                         double sigma2, std::mt19937_64& rng);

/// First N columns of Theta^T (A_L^T kr A_L^H)^T.
DenseMatrix irs_dictionary(const PilotProtocol& protocol, const SystemGeometry& geometry);

MeasurementModel build_measurement_model(const PilotProtocol& protocol,
                                         const SystemGeometry& geometry,
                                         const std::vector<DenseMatrix>& received, double sigma2);

/// Sparse coefficients of an on-grid realization. g_L[j] collects the MS-side
/// gains whose IRS angle pair satisfies j = (irs_aod - irs_aoa) mod N.
GroundTruthFactors ground_truth_factors(const ChannelRealization& ch,
                                        const SystemGeometry& geometry);

/// Cascaded channels H~_BS diag(theta_k) H~_MS, k = 1..K_I, from a coefficient
/// vector of length N^3 ordered as g_L (x) conj(g_T) (x) g_R.
std::vector<DenseMatrix> reconstruct_cascaded(const DenseVector& x, const SystemGeometry& geometry,
                                              const PilotProtocol& protocol);

/// True cascaded channels for every configuration of the protocol.
std::vector<DenseMatrix> true_cascaded(const ChannelRealization& ch, const PilotProtocol& protocol);

/// Draws channel and protocol, simulates the pilots and builds the model.
/// sigma2 is set from the noiseless measurement so that
/// 10 log10(||y~_clean||^2 / E||w~||^2) = snr_db.
ChannelInstance simulate_channel_instance(const SystemGeometry& geometry,
                                          const ProtocolConfig& protocol_cfg, double snr_db,
                                          std::mt19937_64& rng, DenseVector* y_clean = nullptr);

/// Measurement and coefficient counts: R*K_I*K_P and N^3.
struct UndersamplingInfo {
  Index measurements = 0;
  Index coefficients = 0;
  double ratio = 0.0;
};
UndersamplingInfo undersampling(const SystemGeometry& geometry, const ProtocolConfig& protocol);

}  // namespace kronsr
