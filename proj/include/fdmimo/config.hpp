#pragma once

#include <string>
#include <string_view>

#include "fdmimo/types.hpp"

namespace fdmimo {

double db_to_linear(double db);
double linear_to_db(double linear);

/// Parses either a plain number ("0.001") or a dB-suffixed value ("-30dB",
/// "-30 dB") into a linear quantity. Throws ConfigError on malformed input.
double parse_linear(std::string_view text);

/// Dimensions, powers, noise levels and distortion coefficients of the link.
///
/// The distortion vectors hold the per-chain coefficients already divided by
/// the subcarrier count, i.e. K * theta_tx[i] is the vector of kappa_l.
struct SystemConfig {
  int K = 4;
  PerDirection<int> N{2, 2};
  PerDirection<int> M{2, 2};
  PerDirection<int> d{1, 1};
  PerDirection<double> P{1.0, 1.0};
  PerDirection<std::vector<double>> sigma2;  // [i][k]
  PerDirection<RealVec> theta_tx;            // length N_i
  PerDirection<RealVec> theta_rx;            // length M_i
  PerDirection<double> omega{1.0, 1.0};
  std::array<std::array<std::vector<double>, kDirections>, kDirections> zeta;  // [i][j][k]
  int max_iters = 100;
  double rel_tol = 1e-6;

  /// Symmetric setup: every direction uses `antennas` transmit and receive
  /// chains, `streams` streams, power `power`, and the same noise, distortion
  /// (kappa for transmit, beta for receive, both un-normalized) and CSI radius.
  static SystemConfig uniform(int K, int antennas, int streams, double power, double sigma2,
                              double kappa, double beta, double zeta);

  /// K=4, 2x2 antennas, d=1, P=1, sigma2=-30dB, kappa=beta=-30dB, zeta=-15dB.
  static SystemConfig defaults();

  void set_noise(double sigma2_linear);
  void set_distortion(double kappa, double beta);
  void set_zeta(double zeta_linear);

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

}  // namespace fdmimo
