#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fdmimo {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;

/// The two communication directions of the bidirectional link.
inline constexpr int kDirections = 2;

constexpr int other(int i) noexcept { return 1 - i; }

template <class T>
using PerDirection = std::array<T, kDirections>;

/// One matrix per (direction, subcarrier): set[i][k].
using MatrixSet = PerDirection<std::vector<Mat>>;

/// Raised for malformed configurations, specs and dimension mismatches.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot produce a meaningful result
/// (singular system, non-convergent dual search, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fdmimo
