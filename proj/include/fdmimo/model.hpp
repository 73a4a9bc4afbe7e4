#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fdmimo/config.hpp"
#include "fdmimo/types.hpp"

namespace fdmimo {

/// Per-subcarrier channel matrices H[i][j][k] (M_i x N_j). H[i][i] is the
/// desired channel of direction i, H[i][j] with j != i is the
/// self-interference path from transmitter j into receiver i.
struct ChannelSet {
  int K = 0;
  std::array<std::array<std::vector<Mat>, kDirections>, kDirections> H;

  static ChannelSet zeros(const SystemConfig& config);

  const Mat& at(int i, int j, int k) const { return H[i][j][static_cast<std::size_t>(k)]; }
  Mat& at(int i, int j, int k) { return H[i][j][static_cast<std::size_t>(k)]; }

  /// Throws ConfigError unless every matrix has the configured shape.
  void check(const SystemConfig& config) const;
};

/// A channel the signals propagate through, plus the channel the receivers
/// use for self-interference cancellation. Without an SIC estimate the
/// cancellation is exact; otherwise the known-signal residual
/// (H_ij - Hsic_ij) V_j s_j remains in the interference term.
struct Scenario {
  ChannelSet channel;
  std::optional<ChannelSet> sic_estimate;

  static Scenario perfect(ChannelSet channel) { return {std::move(channel), std::nullopt}; }
};

struct TransceiverDesign {
  MatrixSet V;  // N_i x d_i
  MatrixSet U;  // M_i x d_i
  MatrixSet S;  // d_i x d_i, Hermitian PD
  PerDirection<double> iota{0.0, 0.0};

  /// V = 0, U = 0, S = I.
  static TransceiverDesign zeros(const SystemConfig& config);

  void check(const SystemConfig& config) const;
};

struct PerformanceReport {
  PerDirection<std::vector<double>> mse;   // tr(E_i^k), identity weights
  PerDirection<std::vector<double>> rate;  // bits per channel use
  PerDirection<double> power{0.0, 0.0};
  std::vector<double> objective_trace;
  std::vector<double> iteration_seconds;
  int iterations = 0;
  bool converged = false;

  double sum_mse() const;
  double weighted_sum_rate(const PerDirection<double>& omega) const;
};

/// Interference-plus-noise covariance of receiver i on subcarrier k, first
/// order in the distortion coefficients, evaluated on the given channels.
Mat aggregate_covariance(const MatrixSet& V, const ChannelSet& channels, const SystemConfig& config,
                         int i, int k);

/// Same, plus the cancellation residual of an imperfect SIC estimate.
Mat aggregate_covariance(const MatrixSet& V, const Scenario& scenario, const SystemConfig& config,
                         int i, int k);

/// All covariances at once; sums shared across subcarriers are formed once.
MatrixSet aggregate_covariances(const MatrixSet& V, const Scenario& scenario,
                                const SystemConfig& config);

/// E = (U^H H V - I)(U^H H V - I)^H + U^H Sigma U.
Mat mse_matrix(const Mat& U, const Mat& V, const Mat& sigma, const Mat& h_direct);

/// (I + V^H H^H Sigma^-1 H V)^-1, the error matrix reached by the MMSE receiver.
Mat mmse_error_matrix(const Mat& V, const Mat& sigma, const Mat& h_direct);

/// log|I + V^H H^H Sigma^-1 H V| in nats.
double rate_nats(const Mat& V, const Mat& sigma, const Mat& h_direct);

/// Same in bits.
double rate(const Mat& V, const Mat& sigma, const Mat& h_direct);

/// tr((I + K Theta_tx) sum_k V^k V^k^H).
double power_usage(const std::vector<Mat>& V, const RealVec& theta_tx, int K);

/// sum_i sum_k tr(S_i^k E_i^k) (or tr(E_i^k) when use_weights is false).
double weighted_mse_objective(const TransceiverDesign& design, const Scenario& scenario,
                              const SystemConfig& config, bool use_weights = true);

double weighted_mse_objective(const TransceiverDesign& design, const ChannelSet& channels,
                              const SystemConfig& config, bool use_weights = true);

/// Mean of the objective over a finite scenario set.
double average_weighted_mse(const TransceiverDesign& design, std::span<const Scenario> scenarios,
                            const SystemConfig& config, bool use_weights = true);

/// Per-direction/per-subcarrier MSE, rate and power of a design on a world.
PerformanceReport evaluate(const TransceiverDesign& design, const Scenario& world,
                           const SystemConfig& config);

}  // namespace fdmimo
