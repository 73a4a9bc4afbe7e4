#pragma once

#include <optional>
#include <vector>

#include "fdmimo/altqcp.hpp"

namespace fdmimo {

/// S_i^k = (E_i^k)^-1 for the design's current U, V.
MatrixSet update_weights(const TransceiverDesign& design, const ChannelSet& channels,
                         const SystemConfig& config);

/// sum_i omega_i sum_k (ln|S_i^k| + d_i - tr(S_i^k E_i^k)), natural log.
double surrogate_objective(const TransceiverDesign& design, const ChannelSet& channels,
                           const SystemConfig& config);

/// sum_i omega_i sum_k I_i^k in bits.
double weighted_sum_rate(const MatrixSet& V, const Scenario& scenario, const SystemConfig& config);

struct WmmseResult {
  TransceiverDesign design;
  PerformanceReport report;             // objective_trace: weighted sum rate (bits) per outer iteration
  std::vector<double> block_surrogate;  // after init, then after every V, U and S update
};

/// Weighted sum-rate maximization through the weighted-MSE surrogate.
WmmseResult run_wmmse(const ChannelSet& channels, const SystemConfig& config,
                      const SolverOptions& options = {},
                      const std::optional<MatrixSet>& initial_V = std::nullopt,
                      std::optional<SiPowerLimit> si_limit = std::nullopt);

}  // namespace fdmimo
