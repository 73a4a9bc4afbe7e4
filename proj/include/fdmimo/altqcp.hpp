#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fdmimo/model.hpp"

namespace fdmimo {

enum class InitMode { kRightSingular, kRandom };

struct SolverOptions {
  int max_iters = 100;
  double rel_tol = 1e-6;
  /// Absolute tolerance on P_i - power_usage(i) when the power constraint is active.
  double dual_tol = 1e-9;
  InitMode init = InitMode::kRightSingular;
  std::uint64_t seed = 0;  // random initialization only

  void validate() const;
};

/// Extra per-transmitter cap on the self-interference power it injects into
/// the co-located receiver: sum_k ||H_ji^k V_i^k||_F^2 <= threshold.
struct SiPowerLimit {
  double threshold = 0.0;
};

/// Dominant right singular vectors of the desired channel (or i.i.d. Gaussian
/// columns), scaled per direction so that power_usage(i) == P_i.
MatrixSet init_precoders(const ChannelSet& channels, const SystemConfig& config,
                         const SolverOptions& options = {});

/// MMSE receivers U = (Sigma + H V V^H H^H)^-1 H V per (i, k).
MatrixSet update_receivers(const MatrixSet& V, const ChannelSet& channels, const SystemConfig& config);

/// Receivers minimizing the scenario-averaged weighted MSE:
/// U = (mean(Sigma_t + H_t V V^H H_t^H))^-1 mean(H_t) V.
MatrixSet update_receivers(const MatrixSet& V, std::span<const Scenario> scenarios,
                           const SystemConfig& config);

/// Leakage matrix J_i^k collecting how V_i^k feeds transmit and receive
/// distortion at both receivers (and across subcarriers).
Mat leakage_matrix(const MatrixSet& U, const MatrixSet& S, const ChannelSet& channels,
                   const SystemConfig& config, int i, int k);

struct PrecoderUpdate {
  MatrixSet V;
  PerDirection<double> iota{0.0, 0.0};  // power-constraint multipliers
  PerDirection<double> mu{0.0, 0.0};    // SI-power multipliers (SiPowerLimit only)
};

/// Exact minimizer of the weighted MSE over V for fixed U, S under the power
/// constraints. The multipliers are found per direction by bisection.
PrecoderUpdate update_precoders(const MatrixSet& U, const MatrixSet& S, const ChannelSet& channels,
                                const SystemConfig& config, const SolverOptions& options = {});

/// Scenario-averaged variant, optionally with an SI power cap per transmitter.
PrecoderUpdate update_precoders(const MatrixSet& U, const MatrixSet& S,
                                std::span<const Scenario> scenarios, const SystemConfig& config,
                                const SolverOptions& options = {},
                                std::optional<SiPowerLimit> si_limit = std::nullopt);

/// Checks recorded at every precoder update.
struct SolverDiagnostics {
  std::vector<double> half_step_objective;  // after each V and each U update
  double max_slackness = 0.0;               // max |iota_i (power_i - P_i)|
  double max_power_excess = 0.0;            // max (power_i - P_i), clipped at 0
};

struct DesignResult {
  TransceiverDesign design;
  PerformanceReport report;  // objective_trace: one entry per full iteration (plus init)
  SolverDiagnostics diagnostics;
};

/// Alternating weighted-MSE minimization. Weights S default to identity.
DesignResult run_altqcp(const ChannelSet& channels, const SystemConfig& config,
                        const SolverOptions& options = {});

/// General form: scenario-averaged objective, caller-supplied weights and
/// initial precoders, optional SI power cap.
DesignResult run_altqcp(std::span<const Scenario> scenarios, const SystemConfig& config,
                        const SolverOptions& options, const std::optional<MatrixSet>& weights,
                        const std::optional<MatrixSet>& initial_V,
                        std::optional<SiPowerLimit> si_limit = std::nullopt);

}  // namespace fdmimo
