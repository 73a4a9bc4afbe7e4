#pragma once

#include <limits>
#include <optional>

#include "fdmimo/channel.hpp"
#include "fdmimo/robust.hpp"
#include "fdmimo/wmmse.hpp"

namespace fdmimo {

enum class DesignObjective { kMse, kRate };

enum class BaselineMode {
  kHalfDuplex,     // TDD: no self-interference, half the air time per direction
  kKappa0,         // distortion-blind, perfect-CSI design
  kSingleCarrier,  // one design on the subcarrier-averaged channel
  kSiThreshold,    // distortion-blind design with an SI power cap
};

struct BaselineOptions {
  SolverOptions solver;
  DesignObjective objective = DesignObjective::kMse;
  /// SI power cap for kSiThreshold; infinity means no cap.
  double si_threshold = std::numeric_limits<double>::infinity();
};

struct BaselineResult {
  TransceiverDesign design;
  /// True-model evaluation (true distortion, true channels, SIC with the
  /// estimate). Trace fields come from the design run.
  PerformanceReport report;
  double worst_case_mse = 0.0;
};

/// Air-time share of each direction under half-duplex operation.
inline constexpr double kHalfDuplexShare = 0.5;

/// The designer's view of a half-duplex link: cross channels removed.
ChannelRealization half_duplex_view(const ChannelRealization& realization);
SystemConfig half_duplex_config(const SystemConfig& config);

/// Per-direction design (AltQCP for kMse, WMMSE for kRate) on perfect CSI.
struct DesignRun {
  TransceiverDesign design;
  PerformanceReport report;
};
DesignRun design_for(const ChannelSet& channels, const SystemConfig& config,
                     const BaselineOptions& options,
                     std::optional<SiPowerLimit> si_limit = std::nullopt);

BaselineResult run_baseline(BaselineMode mode, const ChannelRealization& realization,
                            const SystemConfig& config, const BaselineOptions& options = {});

}  // namespace fdmimo
