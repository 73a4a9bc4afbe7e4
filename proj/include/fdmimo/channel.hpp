#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "fdmimo/config.hpp"
#include "fdmimo/model.hpp"

namespace fdmimo {

/// Statistics of the desired (Rayleigh) and self-interference (Rician) channels.
struct ChannelStats {
  double rho = 0.01;       // desired-channel entry variance
  double rho_si = 1.0;     // self-interference strength
  double rician_k = 10.0;  // Rician factor K_R
  std::optional<Mat> si_mean_shape;  // H_0; all-ones when unset

  /// Deterministic SI mean sqrt(rho_si K_R / (1 + K_R)) H_0 for an rows x cols path.
  Mat si_mean(Eigen::Index rows, Eigen::Index cols) const;
  void validate() const;
};

/// One channel draw: the true channels, the estimates a designer sees, and
/// the shaping matrices D of the feasible error sets ||D (H - Hest)||_F <= zeta.
struct ChannelRealization {
  ChannelSet truth;
  ChannelSet estimate;
  std::array<std::array<std::vector<Mat>, kDirections>, kDirections> shaping;  // M_i x M_i

  /// Signals propagate through the true channel, SIC uses the estimate.
  Scenario world() const { return {truth, estimate}; }
  /// What a designer assumes: the estimate is exact.
  Scenario nominal() const { return Scenario::perfect(estimate); }
};

/// Concrete CSI errors Delta[i][j][k] = H - Hest.
struct CsiErrorSet {
  std::array<std::array<std::vector<Mat>, kDirections>, kDirections> delta;
};

enum class PerturbMode { kInterior, kBoundary };

/// SplitMix64 finalizer; used to derive independent per-trial seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed of stream `index` under master seed `master`.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

/// Circularly-symmetric complex Gaussian matrix with entry variance `var`.
Mat complex_gaussian(Eigen::Index rows, Eigen::Index cols, double var, std::mt19937_64& rng);

/// Desired channels i.i.d. CN(0, rho); SI channels Rician around the scaled
/// H_0 with residual variance rho_si/(1+K_R). Hest = H, D = I.
ChannelRealization draw_channels(const SystemConfig& config, const ChannelStats& stats,
                                 std::uint64_t seed);

/// Draws Delta inside (interior) or on (boundary) each feasible ball
/// ||D Delta||_F <= zeta and sets Hest = H - Delta.
CsiErrorSet perturb_csi(ChannelRealization& channels, const SystemConfig& config,
                        std::uint64_t seed, PerturbMode mode);

/// FNV-1a over the raw doubles of the true and estimated channels.
std::uint64_t channel_hash(const ChannelRealization& channels);

}  // namespace fdmimo
