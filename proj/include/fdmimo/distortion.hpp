#pragma once

#include <cstdint>

#include "fdmimo/model.hpp"

namespace fdmimo {

/// Unitary DFT matrix, F(k, m) = exp(-j 2 pi m k / K) / sqrt(K).
Mat unitary_dft(int K);

/// Empirical statistics of a block-level time-domain simulation of the
/// limited-dynamic-range transceivers.
struct DistortionStats {
  long blocks = 0;
  MatrixSet nu_covariance;                         // [i][k], M_i x M_i
  PerDirection<Eigen::MatrixXd> tx_distortion_var;  // [i](l, k): E|e_t,l^k|^2
  PerDirection<Eigen::MatrixXd> rx_distortion_var;  // [i](l, k): E|e_r,l^k|^2
  double max_tx_signal_corr = 0.0;  // |corr(e_t,l^k, v_l^k)|
  double max_tx_chain_corr = 0.0;   // |corr(e_t,l^k, e_t,l'^k)|, l != l'
  double max_rx_signal_corr = 0.0;  // |corr(e_r,l^k, u_l^k)|
  double max_rx_chain_corr = 0.0;
};

/// Runs n_blocks OFDM blocks through the distortion model: Gaussian symbols,
/// IDFT, per-chain transmit distortion, propagation through scenario.channel,
/// per-chain receive distortion and thermal noise, DFT, then cancellation of
/// the known SI with scenario.sic_estimate (exact when absent).
DistortionStats simulate_blocks(const TransceiverDesign& design, const Scenario& scenario,
                                const SystemConfig& config, long n_blocks, std::uint64_t seed);

/// Per-chain frequency-domain distortion variance theta_l * sum_m [V^m V^m^H]_ll
/// (theta already carries the 1/K factor).
RealVec freq_distortion_variance(const std::vector<Mat>& V, const RealVec& theta);

}  // namespace fdmimo
