#include "fdmimo/model.hpp"

#include <cmath>
#include <numbers>

#include "fdmimo/linalg.hpp"

namespace fdmimo {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("dimension mismatch: ") + what);
}

// diag(sum_l V^l V^l^H) as a real vector.
RealVec chain_power(const std::vector<Mat>& V) {
  RealVec q = RealVec::Zero(V.empty() ? 0 : V.front().rows());
  for (const auto& v : V) q += v.rowwise().squaredNorm();
  return q;
}

// Receive-chain power sum over subcarriers of receiver i, without distortion:
// sum_l (sigma2_l + diag(sum_j H_ij^l V_j^l V_j^l^H H_ij^l^H)).
RealVec receive_power(const MatrixSet& V, const ChannelSet& ch, const SystemConfig& cfg, int i) {
  RealVec r = RealVec::Zero(cfg.M[i]);
  for (int l = 0; l < cfg.K; ++l) {
    r.array() += cfg.sigma2[i][static_cast<std::size_t>(l)];
    for (int j = 0; j < kDirections; ++j) {
      r += (ch.at(i, j, l) * V[j][static_cast<std::size_t>(l)]).rowwise().squaredNorm();
    }
  }
  return r;
}

Mat covariance_from_sums(const ChannelSet& ch, const SystemConfig& cfg, int i, int k,
                         const PerDirection<RealVec>& tx_power, const RealVec& rx_power) {
  const int m = cfg.M[i];
  Mat sigma = Mat::Zero(m, m);
  for (int j = 0; j < kDirections; ++j) {
    const Mat& h = ch.at(i, j, k);
    RealVec w = cfg.theta_tx[j].cwiseProduct(tx_power[j]);
    sigma += h * w.cast<cd>().asDiagonal() * h.adjoint();
  }
  sigma.diagonal().array() += cfg.sigma2[i][static_cast<std::size_t>(k)];
  sigma.diagonal() += cfg.theta_rx[i].cwiseProduct(rx_power).cast<cd>();
  return linalg::hermitian_part(sigma);
}

Mat sic_residual(const MatrixSet& V, const Scenario& sc, int i, int k) {
  const Mat& h = sc.channel.at(i, i, k);
  Mat out = Mat::Zero(h.rows(), h.rows());
  if (!sc.sic_estimate) return out;
  const int j = other(i);
  Mat rv = (sc.channel.at(i, j, k) - sc.sic_estimate->at(i, j, k)) * V[j][static_cast<std::size_t>(k)];
  out += rv * rv.adjoint();
  return out;
}

void check_V(const MatrixSet& V, const SystemConfig& cfg) {
  for (int i = 0; i < kDirections; ++i) {
    require(static_cast<int>(V[i].size()) == cfg.K, "precoder count != K");
    for (const auto& v : V[i]) require(v.rows() == cfg.N[i] && v.cols() == cfg.d[i], "precoder shape");
  }
}

}  // namespace

ChannelSet ChannelSet::zeros(const SystemConfig& cfg) {
  ChannelSet c;
  c.K = cfg.K;
  for (int i = 0; i < kDirections; ++i)
    for (int j = 0; j < kDirections; ++j)
      c.H[i][j].assign(static_cast<std::size_t>(cfg.K), Mat::Zero(cfg.M[i], cfg.N[j]));
  return c;
}

void ChannelSet::check(const SystemConfig& cfg) const {
  require(K == cfg.K, "channel subcarrier count != K");
  for (int i = 0; i < kDirections; ++i)
    for (int j = 0; j < kDirections; ++j) {
      require(static_cast<int>(H[i][j].size()) == cfg.K, "channel count != K");
      for (const auto& h : H[i][j]) require(h.rows() == cfg.M[i] && h.cols() == cfg.N[j], "channel shape");
    }
}

TransceiverDesign TransceiverDesign::zeros(const SystemConfig& cfg) {
  TransceiverDesign d;
  for (int i = 0; i < kDirections; ++i) {
    const auto K = static_cast<std::size_t>(cfg.K);
    d.V[i].assign(K, Mat::Zero(cfg.N[i], cfg.d[i]));
    d.U[i].assign(K, Mat::Zero(cfg.M[i], cfg.d[i]));
    d.S[i].assign(K, Mat::Identity(cfg.d[i], cfg.d[i]));
  }
  return d;
}

void TransceiverDesign::check(const SystemConfig& cfg) const {
  check_V(V, cfg);
  for (int i = 0; i < kDirections; ++i) {
    require(static_cast<int>(U[i].size()) == cfg.K && static_cast<int>(S[i].size()) == cfg.K,
            "decoder/weight count != K");
    for (const auto& u : U[i]) require(u.rows() == cfg.M[i] && u.cols() == cfg.d[i], "decoder shape");
    for (const auto& s : S[i]) require(s.rows() == cfg.d[i] && s.cols() == cfg.d[i], "weight shape");
  }
}

double PerformanceReport::sum_mse() const {
  double s = 0.0;
  for (const auto& dir : mse)
    for (double v : dir) s += v;
  return s;
}

double PerformanceReport::weighted_sum_rate(const PerDirection<double>& omega) const {
  double s = 0.0;
  for (int i = 0; i < kDirections; ++i)
    for (double v : rate[i]) s += omega[i] * v;
  return s;
}

Mat aggregate_covariance(const MatrixSet& V, const ChannelSet& ch, const SystemConfig& cfg, int i,
                         int k) {
  check_V(V, cfg);
  ch.check(cfg);
  require(i >= 0 && i < kDirections && k >= 0 && k < cfg.K, "index out of range");
  PerDirection<RealVec> tx{chain_power(V[0]), chain_power(V[1])};
  return covariance_from_sums(ch, cfg, i, k, tx, receive_power(V, ch, cfg, i));
}

Mat aggregate_covariance(const MatrixSet& V, const Scenario& sc, const SystemConfig& cfg, int i,
                         int k) {
  Mat sigma = aggregate_covariance(V, sc.channel, cfg, i, k);
  if (sc.sic_estimate) {
    sc.sic_estimate->check(cfg);
    sigma += sic_residual(V, sc, i, k);
  }
  return linalg::hermitian_part(sigma);
}

MatrixSet aggregate_covariances(const MatrixSet& V, const Scenario& sc, const SystemConfig& cfg) {
  check_V(V, cfg);
  sc.channel.check(cfg);
  if (sc.sic_estimate) sc.sic_estimate->check(cfg);
  PerDirection<RealVec> tx{chain_power(V[0]), chain_power(V[1])};
  MatrixSet out;
  for (int i = 0; i < kDirections; ++i) {
    RealVec rx = receive_power(V, sc.channel, cfg, i);
    out[i].reserve(static_cast<std::size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) {
      Mat s = covariance_from_sums(sc.channel, cfg, i, k, tx, rx);
      if (sc.sic_estimate) s = linalg::hermitian_part(s + sic_residual(V, sc, i, k));
      out[i].push_back(std::move(s));
    }
  }
  return out;
}

Mat mse_matrix(const Mat& U, const Mat& V, const Mat& sigma, const Mat& h) {
  require(h.rows() == U.rows() && h.cols() == V.rows() && U.cols() == V.cols(), "mse_matrix operands");
  require(sigma.rows() == U.rows() && sigma.cols() == U.rows(), "mse_matrix covariance");
  Mat g = U.adjoint() * h * V;
  g.diagonal().array() -= 1.0;
  return linalg::hermitian_part(g * g.adjoint() + U.adjoint() * sigma * U);
}

Mat mmse_error_matrix(const Mat& V, const Mat& sigma, const Mat& h) {
  require(h.cols() == V.rows() && sigma.rows() == h.rows(), "mmse_error_matrix operands");
  Mat hv = h * V;
  Mat a = hv.adjoint() * linalg::hpd_solve(sigma, hv);
  a.diagonal().array() += 1.0;
  return linalg::hpd_inverse(a);
}

double rate_nats(const Mat& V, const Mat& sigma, const Mat& h) {
  require(h.cols() == V.rows() && sigma.rows() == h.rows(), "rate operands");
  Mat hv = h * V;
  Mat a = hv.adjoint() * linalg::hpd_solve(sigma, hv);
  a.diagonal().array() += 1.0;
  return std::max(0.0, linalg::hpd_logdet(a));
}

double rate(const Mat& V, const Mat& sigma, const Mat& h) {
  return rate_nats(V, sigma, h) / std::numbers::ln2;
}

double power_usage(const std::vector<Mat>& V, const RealVec& theta_tx, int K) {
  if (V.empty()) return 0.0;
  require(V.front().rows() == theta_tx.size(), "power_usage theta length");
  RealVec q = chain_power(V);
  return (RealVec::Ones(q.size()) + K * theta_tx).dot(q);
}

double weighted_mse_objective(const TransceiverDesign& design, const Scenario& sc,
                              const SystemConfig& cfg, bool use_weights) {
  design.check(cfg);
  MatrixSet sigma = aggregate_covariances(design.V, sc, cfg);
  double total = 0.0;
  for (int i = 0; i < kDirections; ++i)
    for (int k = 0; k < cfg.K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      Mat e = mse_matrix(design.U[i][kk], design.V[i][kk], sigma[i][kk], sc.channel.at(i, i, k));
      total += use_weights ? (design.S[i][kk] * e).trace().real() : e.trace().real();
    }
  return total;
}

double weighted_mse_objective(const TransceiverDesign& design, const ChannelSet& channels,
                              const SystemConfig& cfg, bool use_weights) {
  return weighted_mse_objective(design, Scenario::perfect(channels), cfg, use_weights);
}

double average_weighted_mse(const TransceiverDesign& design, std::span<const Scenario> scenarios,
                            const SystemConfig& cfg, bool use_weights) {
  require(!scenarios.empty(), "empty scenario set");
  double s = 0.0;
  for (const auto& sc : scenarios) s += weighted_mse_objective(design, sc, cfg, use_weights);
  return s / static_cast<double>(scenarios.size());
}

PerformanceReport evaluate(const TransceiverDesign& design, const Scenario& world,
                           const SystemConfig& cfg) {
  design.check(cfg);
  MatrixSet sigma = aggregate_covariances(design.V, world, cfg);
  PerformanceReport r;
  for (int i = 0; i < kDirections; ++i) {
    r.mse[i].resize(static_cast<std::size_t>(cfg.K));
    r.rate[i].resize(static_cast<std::size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const Mat& h = world.channel.at(i, i, k);
      r.mse[i][kk] = mse_matrix(design.U[i][kk], design.V[i][kk], sigma[i][kk], h).trace().real();
      r.rate[i][kk] = rate(design.V[i][kk], sigma[i][kk], h);
    }
    r.power[i] = power_usage(design.V[i], cfg.theta_tx[i], cfg.K);
  }
  return r;
}

}  // namespace fdmimo
