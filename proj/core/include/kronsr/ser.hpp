#pragma once

// Uncoded 8-QAM transmission through the true cascaded channels, equalized
// with an estimated channel.
//
// The cascaded channel of the single-AoD model has (numerical) rank 1, so T
// independent spatial streams cannot be separated by any receiver. The
// transmitter therefore sends r streams along the leading right singular
// vectors of the estimated channel, r = numerical rank of the estimate
// (capped at T), and the receiver zero-forces the effective channel
// H_est V_r / sqrt(r). Full-rank channels reduce to plain T-stream ZF up to a
// unitary precoder.

#include <kronsr/types.hpp>

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace kronsr {

struct SerOptions {
  // A singular value counts toward the stream rank when it exceeds this
  // fraction of the largest one.
  double rank_tol = 0.1;
};

struct SerResult {
  double ser = 0.0;
  std::uint64_t symbols = 0;
  std::uint64_t errors = 0;
  // Some configuration had an all-zero (or non-finite) estimate; its symbols
  // were detected from an all-zero equalizer output.
  bool rank_deficient = false;
  std::vector<Index> streams;  // stream count used per configuration
};

/// Rectangular 4x2 Gray-labelled constellation with unit average energy.
/// Index b = 2*i + q with in-phase level i in {0..3} and quadrature level q.
const std::array<cdouble, 8>& qam8_points();

/// Gray bit label of each constellation point (3 bits).
const std::array<unsigned, 8>& qam8_labels();

/// Minimum-distance decision.
int qam8_detect(cdouble z);

/// Receive noise variance per antenna for a channel and SNR. Unit total
/// transmit power spread evenly over the T antennas gives an average received
/// power of ||H||_F^2 / (T R) per BS antenna; the SNR is that over sigma_w^2.
/// Depends on the true channel only, so perfect and estimated CSI see the same
/// noise.
double ser_noise_variance(const DenseMatrix& h_true, double snr_db);

SerResult simulate_ser(const std::vector<DenseMatrix>& true_channels,
                       const std::vector<DenseMatrix>& est_channels, double snr_db,
                       std::uint64_t n_symbols, std::mt19937_64& rng, const SerOptions& opt = {});

}  // namespace kronsr
