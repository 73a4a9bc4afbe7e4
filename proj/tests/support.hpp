#pragma once

// Random instances and reference implementations written independently of
// the library (explicit loops over entries instead of matrix expressions).

#include <cmath>
#include <random>

#include "fdmimo/channel.hpp"
#include "fdmimo/model.hpp"

namespace support {

using namespace fdmimo;

inline Mat gaussian(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double var = 1.0) {
  return complex_gaussian(r, c, var, rng);
}

inline Mat random_hpd(Eigen::Index n, std::mt19937_64& rng) {
  const Mat a = gaussian(n, n, rng);
  return a * a.adjoint() + 0.5 * Mat::Identity(n, n);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Small random link with non-uniform distortion, noise and dimensions.
inline SystemConfig random_config(std::mt19937_64& rng, int max_dim = 3, int max_K = 4) {
  SystemConfig c;
  c.K = uniform_int(rng, 1, max_K);
  for (int i = 0; i < kDirections; ++i) {
    c.N[i] = uniform_int(rng, 1, max_dim);
    c.M[i] = uniform_int(rng, 1, max_dim);
    c.d[i] = uniform_int(rng, 1, std::min(c.N[i], c.M[i]));
    c.P[i] = uniform(rng, 0.5, 2.0);
    c.omega[i] = uniform(rng, 0.5, 1.5);
    c.sigma2[i].clear();
    for (int k = 0; k < c.K; ++k) c.sigma2[i].push_back(uniform(rng, 0.01, 0.2));
    c.theta_tx[i] = RealVec(c.N[i]);
    c.theta_rx[i] = RealVec(c.M[i]);
    for (int l = 0; l < c.N[i]; ++l) c.theta_tx[i](l) = uniform(rng, 0.0, 0.05);
    for (int l = 0; l < c.M[i]; ++l) c.theta_rx[i](l) = uniform(rng, 0.0, 0.05);
  }
  c.set_zeta(0.1);
  return c;
}

inline ChannelSet random_channels(const SystemConfig& cfg, std::mt19937_64& rng) {
  ChannelSet ch = ChannelSet::zeros(cfg);
  for (int i = 0; i < kDirections; ++i)
    for (int j = 0; j < kDirections; ++j)
      for (int k = 0; k < cfg.K; ++k) ch.at(i, j, k) = gaussian(cfg.M[i], cfg.N[j], rng, i == j ? 1.0 : 0.5);
  return ch;
}

inline TransceiverDesign random_design(const SystemConfig& cfg, std::mt19937_64& rng) {
  TransceiverDesign d = TransceiverDesign::zeros(cfg);
  for (int i = 0; i < kDirections; ++i)
    for (int k = 0; k < cfg.K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      d.V[i][kk] = gaussian(cfg.N[i], cfg.d[i], rng, 0.3);
      d.U[i][kk] = gaussian(cfg.M[i], cfg.d[i], rng, 0.3);
      d.S[i][kk] = random_hpd(cfg.d[i], rng);
    }
  return d;
}

/// Realization with estimate = truth and random invertible shaping matrices.
inline ChannelRealization random_realization(const SystemConfig& cfg, std::mt19937_64& rng,
                                             bool identity_shaping = false) {
  ChannelRealization r;
  r.truth = random_channels(cfg, rng);
  r.estimate = r.truth;
  for (int i = 0; i < kDirections; ++i)
    for (int j = 0; j < kDirections; ++j)
      for (int k = 0; k < cfg.K; ++k) {
        const Mat D = identity_shaping ? Mat::Identity(cfg.M[i], cfg.M[i])
                                       : Mat(Mat::Identity(cfg.M[i], cfg.M[i]) + 0.3 * gaussian(cfg.M[i], cfg.M[i], rng));
        r.shaping[i][j].push_back(D);
      }
  return r;
}

/// Interference-plus-noise covariance entry by entry:
///   sigma2 delta_ab
/// + sum_j sum_l H_ij(a,l) theta_tx_j(l) q_j(l) conj(H_ij(b,l)),  q_j(l) = sum_k' sum_s |V_j^k'(l,s)|^2
/// + delta_ab theta_rx_i(a) sum_k' (sigma2_k' + sum_j |[H_ij^k' V_j^k']_a|^2)
/// + cancellation residual R V_j V_j^H R^H for cross paths when an SIC estimate is given.
inline Mat oracle_covariance(const MatrixSet& V, const ChannelSet& ch, const SystemConfig& cfg, int i, int k,
                             const ChannelSet* sic = nullptr) {
  const int M = cfg.M[i];
  Mat out = Mat::Zero(M, M);
  const auto kk = static_cast<std::size_t>(k);
  for (int a = 0; a < M; ++a) out(a, a) += cfg.sigma2[i][kk];
  for (int j = 0; j < kDirections; ++j) {
    const Mat& h = ch.at(i, j, k);
    for (int l = 0; l < cfg.N[j]; ++l) {
      double q = 0.0;
      for (int kp = 0; kp < cfg.K; ++kp)
        for (int s = 0; s < cfg.d[j]; ++s) q += std::norm(V[j][static_cast<std::size_t>(kp)](l, s));
      const double w = cfg.theta_tx[j](l) * q;
      for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) out(a, b) += h(a, l) * w * std::conj(h(b, l));
    }
  }
  for (int a = 0; a < M; ++a) {
    double acc = 0.0;
    for (int kp = 0; kp < cfg.K; ++kp) {
      acc += cfg.sigma2[i][static_cast<std::size_t>(kp)];
      for (int j = 0; j < kDirections; ++j) {
        const Mat& h = ch.at(i, j, kp);
        const Mat& v = V[j][static_cast<std::size_t>(kp)];
        for (int s = 0; s < cfg.d[j]; ++s) {
          cd y = 0.0;
          for (int l = 0; l < cfg.N[j]; ++l) y += h(a, l) * v(l, s);
          acc += std::norm(y);
        }
      }
    }
    out(a, a) += cfg.theta_rx[i](a) * acc;
  }
  if (sic) {
    const int j = other(i);
    const Mat r = ch.at(i, j, k) - sic->at(i, j, k);
    const Mat& v = V[j][kk];
    for (int s = 0; s < cfg.d[j]; ++s) {
      Vec y = Vec::Zero(M);
      for (int a = 0; a < M; ++a)
        for (int l = 0; l < cfg.N[j]; ++l) y(a) += r(a, l) * v(l, s);
      for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) out(a, b) += y(a) * std::conj(y(b));
    }
  }
  return out;
}

/// sum_k sum_l (1 + K theta_l) sum_s |V^k(l,s)|^2
inline double oracle_power(const std::vector<Mat>& V, const RealVec& theta, int K) {
  double p = 0.0;
  for (const auto& v : V)
    for (Eigen::Index l = 0; l < v.rows(); ++l)
      for (Eigen::Index s = 0; s < v.cols(); ++s) p += (1.0 + K * theta(l)) * std::norm(v(l, s));
  return p;
}

/// sum_i sum_k tr(S E) with E built from the oracle covariance.
inline double oracle_objective(const TransceiverDesign& d, const ChannelSet& ch, const SystemConfig& cfg,
                               bool weights = true, const ChannelSet* sic = nullptr) {
  double total = 0.0;
  for (int i = 0; i < kDirections; ++i)
    for (int k = 0; k < cfg.K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const Mat& u = d.U[i][kk];
      const Mat g = u.adjoint() * ch.at(i, i, k) * d.V[i][kk] - Mat::Identity(cfg.d[i], cfg.d[i]);
      const Mat e = g * g.adjoint() + u.adjoint() * oracle_covariance(d.V, ch, cfg, i, k, sic) * u;
      total += weights ? (d.S[i][kk] * e).trace().real() : e.trace().real();
    }
  return total;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace support
