#include <kronsr/errors.hpp>
#include <kronsr/experiments.hpp>
#include <kronsr/kron_linalg.hpp>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

namespace kronsr {

template <typename T>
double rmse(const Vec<T>& x_hat, const Vec<T>& x_true) {
  if (x_hat.size() != x_true.size())
    throw DimensionError("rmse: lengths " + std::to_string(x_hat.size()) + " and " +
                         std::to_string(x_true.size()) + " differ");
  const double ref = x_true.norm();
  if (!(ref > 0.0)) throw InvalidInput("rmse: ground truth is zero");
  return (x_hat - x_true).norm() / ref;
}

double srr(std::vector<Index> support_hat, std::vector<Index> support_true) {
  std::sort(support_hat.begin(), support_hat.end());
  support_hat.erase(std::unique(support_hat.begin(), support_hat.end()), support_hat.end());
  std::sort(support_true.begin(), support_true.end());
  support_true.erase(std::unique(support_true.begin(), support_true.end()), support_true.end());
  if (support_hat.empty() && support_true.empty()) return 1.0;
  std::vector<Index> common;
  std::set_intersection(support_hat.begin(), support_hat.end(), support_true.begin(),
                        support_true.end(), std::back_inserter(common));
  const std::size_t uni = support_hat.size() + support_true.size() - common.size();
  return static_cast<double>(common.size()) / static_cast<double>(uni);
}

double channel_rmse(const std::vector<DenseMatrix>& true_channels,
                    const std::vector<DenseMatrix>& est_channels) {
  if (true_channels.empty()) throw InvalidInput("channel_rmse: no channels");
  if (true_channels.size() != est_channels.size())
    throw DimensionError("channel_rmse: " + std::to_string(true_channels.size()) + " true vs " +
                         std::to_string(est_channels.size()) + " estimated channels");
  double acc = 0.0;
  for (std::size_t k = 0; k < true_channels.size(); ++k) {
    const auto& h = true_channels[k];
    const auto& e = est_channels[k];
    if (h.rows() != e.rows() || h.cols() != e.cols())
      throw DimensionError("channel_rmse: shape mismatch at configuration " + std::to_string(k));
    const double ref = h.norm();
    if (!(ref > 0.0))
      throw InvalidInput("channel_rmse: true channel " + std::to_string(k) + " is zero");
    acc += (h - e).norm() / ref;
  }
  return acc / static_cast<double>(true_channels.size());
}

double power_db(double squared_norm) {
  if (!(squared_norm > 0.0)) return kDbFloor;
  return std::max(kDbFloor, 10.0 * std::log10(squared_norm));
}

template <typename T>
DenoiseGain denoise_gain(const Vec<T>& y_noisy, const Vec<T>& y_reassembled,
                         const Vec<T>& y_clean) {
  if (y_noisy.size() != y_clean.size() || y_reassembled.size() != y_clean.size())
    throw DimensionError("denoise_gain: vectors must have equal length");
  return {power_db((y_noisy - y_clean).squaredNorm()),
          power_db((y_reassembled - y_clean).squaredNorm())};
}

template <typename T>
DenoiseGain measure_denoise(const Vec<T>& y_noisy, const Vec<T>& y_clean,
                            const std::vector<Index>& row_dims) {
  const FactorChain<T> chain = decompose_chain(y_noisy, row_dims);
  return denoise_gain<T>(y_noisy, kron_vectors(chain.factors), y_clean);
}

template double rmse<double>(const Vec<double>&, const Vec<double>&);
template double rmse<cdouble>(const Vec<cdouble>&, const Vec<cdouble>&);
template DenoiseGain denoise_gain<double>(const Vec<double>&, const Vec<double>&,
                                          const Vec<double>&);
template DenoiseGain denoise_gain<cdouble>(const Vec<cdouble>&, const Vec<cdouble>&,
                                           const Vec<cdouble>&);
template DenoiseGain measure_denoise<double>(const Vec<double>&, const Vec<double>&,
                                             const std::vector<Index>&);
template DenoiseGain measure_denoise<cdouble>(const Vec<cdouble>&, const Vec<cdouble>&,
                                              const std::vector<Index>&);

}  // namespace kronsr
