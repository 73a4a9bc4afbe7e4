#pragma once

#include <optional>
#include <vector>

#include "fdmimo/altqcp.hpp"
#include "fdmimo/channel.hpp"

namespace fdmimo {

/// The weighted MSE as a function of a single error matrix Delta = Delta_ij^k
/// (all other errors zero), with vec(Delta) = Dtilde * b:
///   objective(b) = ||C Dtilde b + c||^2 + remainder.
/// vec is column-major; b has N_j * M_i entries.
struct QuadraticErrorForm {
  Mat C;       // residual rows x (N_j M_i), acts on vec(Delta)
  Vec c;       // residual at Delta = 0
  Mat Dtilde;  // I_N (x) D^-1
  double remainder = 0.0;
  Eigen::Index rows = 0, cols = 0;  // shape of Delta (M_i x N_j)

  /// ||C Dtilde b + c||^2 + remainder.
  double objective(const Vec& b) const;
  /// Delta = D^-1 reshape(b).
  Mat delta(const Vec& b) const;
};

/// Builds the form around the estimated channels of `realization` for the
/// error matrix (i, j, k). Signals see Hest + Delta while cancellation uses
/// Hest. Weights W_i^k default to identity (objective = plain sum MSE).
QuadraticErrorForm build_quadratic_form(const TransceiverDesign& design,
                                        const ChannelRealization& realization,
                                        const SystemConfig& config, int i, int j, int k,
                                        const std::optional<MatrixSet>& weights = std::nullopt);

struct WorstCaseResult {
  Vec b_star;
  double rho_star = 0.0;
  double value = 0.0;  // ||C Dtilde b* + c||^2
  Mat Delta_star;
  bool hard_case = false;
};

/// max ||C Dtilde b + c||^2 subject to ||b|| <= zeta.
WorstCaseResult worst_case_error(const QuadraticErrorForm& form, double zeta);

/// Upper bound of the Lagrangian dual at rho > lambda_max(M):
/// m^H (rho I - M)^-1 m + ||c||^2 + rho zeta^2.
double dual_bound(const QuadraticErrorForm& form, double zeta, double rho);

struct WorstCaseAnalysis {
  double nominal = 0.0;     // objective at Delta = 0
  double worst_case = 0.0;  // nominal + sum of increments
  CsiErrorSet worst_delta;  // per (i, j, k) maximizers
};

/// Worst-case objective over the per-matrix error balls of `realization`
/// (radii config.zeta, shaping realization.shaping).
WorstCaseAnalysis analyze_worst_case(const TransceiverDesign& design,
                                     const ChannelRealization& realization,
                                     const SystemConfig& config,
                                     const std::optional<MatrixSet>& weights = std::nullopt);

double worst_case_mse(const TransceiverDesign& design, const ChannelRealization& realization,
                      const SystemConfig& config,
                      const std::optional<MatrixSet>& weights = std::nullopt);

struct CuttingSetOptions {
  int max_cuts = 8;
  double rel_tol = 1e-3;
  SolverOptions solver;

  void validate() const;
};

struct CuttingSetResult {
  TransceiverDesign design;  // lowest worst-case MSE over all cuts
  PerformanceReport report;  // design-time report of the returned design
  std::vector<double> worst_case_trace;  // per cut
  std::vector<double> gap_trace;         // (best worst case so far - design-time value) / best, per cut
  int best_cut = 0;
  int cuts = 0;
};

/// Alternates an averaged AltQCP design over {Hest, Hest + Delta^(1), ...}
/// with a worst-case search that appends the next most destructive errors.
CuttingSetResult run_cutting_set(const ChannelRealization& realization, const SystemConfig& config,
                                 const CuttingSetOptions& options = {});

}  // namespace fdmimo
