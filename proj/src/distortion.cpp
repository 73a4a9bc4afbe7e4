#include "fdmimo/distortion.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fdmimo/channel.hpp"

namespace fdmimo {

Mat unitary_dft(int K) {
  if (K < 1) throw ConfigError("DFT size must be >= 1");
  Mat f(K, K);
  const double scale = 1.0 / std::sqrt(static_cast<double>(K));
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < K; ++m) {
      // Reduce the exponent first so large K keeps full phase accuracy.
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((m * k) % K) / K;
      f(k, m) = std::polar(scale, phase);
    }
  return f;
}

RealVec freq_distortion_variance(const std::vector<Mat>& V, const RealVec& theta) {
  RealVec q = RealVec::Zero(theta.size());
  for (const auto& v : V) q += v.rowwise().squaredNorm();
  return theta.cwiseProduct(q);
}

namespace {

struct CorrAccumulator {
  // Cross sums sum a conj(b) and the two energies, per (row, subcarrier).
  Mat cross;
  Eigen::MatrixXd ea, eb;

  void init(Eigen::Index rows, Eigen::Index K) {
    cross = Mat::Zero(rows, K);
    ea = Eigen::MatrixXd::Zero(rows, K);
    eb = Eigen::MatrixXd::Zero(rows, K);
  }
  void add(const Mat& a, const Mat& b) {
    cross += a.cwiseProduct(b.conjugate());
    ea += a.cwiseAbs2();
    eb += b.cwiseAbs2();
  }
  double max_abs_corr() const {
    double worst = 0.0;
    for (Eigen::Index r = 0; r < cross.rows(); ++r)
      for (Eigen::Index c = 0; c < cross.cols(); ++c) {
        const double den = std::sqrt(ea(r, c) * eb(r, c));
        if (den > 0.0) worst = std::max(worst, std::abs(cross(r, c)) / den);
      }
    return worst;
  }
};

// Max |corr| between distinct rows of `samples` on the same subcarrier.
struct ChainCorrAccumulator {
  std::vector<Mat> gram;  // per subcarrier, rows x rows

  void init(Eigen::Index rows, Eigen::Index K) {
    gram.assign(static_cast<std::size_t>(K), Mat::Zero(rows, rows));
  }
  void add(const Mat& samples) {
    for (Eigen::Index k = 0; k < samples.cols(); ++k) {
      gram[static_cast<std::size_t>(k)] += samples.col(k) * samples.col(k).adjoint();
    }
  }
  double max_abs_corr() const {
    double worst = 0.0;
    for (const auto& g : gram)
      for (Eigen::Index a = 0; a < g.rows(); ++a)
        for (Eigen::Index b = a + 1; b < g.rows(); ++b) {
          const double den = std::sqrt(g(a, a).real() * g(b, b).real());
          if (den > 0.0) worst = std::max(worst, std::abs(g(a, b)) / den);
        }
    return worst;
  }
};

}  // namespace

DistortionStats simulate_blocks(const TransceiverDesign& design, const Scenario& sc,
                                const SystemConfig& cfg, long n_blocks, std::uint64_t seed) {
  if (n_blocks < 1) throw ConfigError("n_blocks must be >= 1");
  cfg.validate();
  design.check(cfg);
  sc.channel.check(cfg);
  const ChannelSet& h = sc.channel;
  const ChannelSet& h_sic = sc.sic_estimate ? *sc.sic_estimate : sc.channel;

  const int K = cfg.K;
  const Mat F = unitary_dft(K);
  const Mat Finv = F.adjoint();

  // Time-domain distortion standard deviations from the analytic signal powers.
  PerDirection<RealVec> tx_var;
  for (int j = 0; j < kDirections; ++j) tx_var[j] = freq_distortion_variance(design.V[j], cfg.theta_tx[j]);
  PerDirection<RealVec> rx_var;
  for (int i = 0; i < kDirections; ++i) {
    RealVec per_chain = RealVec::Zero(cfg.M[i]);
    for (int k = 0; k < K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      Mat cov = Mat::Zero(cfg.M[i], cfg.M[i]);
      for (int j = 0; j < kDirections; ++j) {
        Mat tx_cov = design.V[j][kk] * design.V[j][kk].adjoint();
        tx_cov.diagonal() += tx_var[j].cast<cd>();
        cov += h.at(i, j, k) * tx_cov * h.at(i, j, k).adjoint();
      }
      per_chain += cov.diagonal().real();
      per_chain.array() += cfg.sigma2[i][kk];
    }
    // beta_l * E|u_l(t)|^2 with E|u_l(t)|^2 = per_chain / K and beta_l = K theta_l.
    rx_var[i] = cfg.theta_rx[i].cwiseProduct(per_chain);
  }

  std::mt19937_64 rng(mix_seed(seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto cn = [&](double var) {
    const double s = std::sqrt(var / 2.0);
    const double re = gauss(rng);
    const double im = gauss(rng);
    return cd(s * re, s * im);
  };

  DistortionStats st;
  st.blocks = n_blocks;
  PerDirection<CorrAccumulator> tx_sig, rx_sig;
  PerDirection<ChainCorrAccumulator> tx_chain, rx_chain;
  for (int i = 0; i < kDirections; ++i) {
    st.nu_covariance[i].assign(static_cast<std::size_t>(K), Mat::Zero(cfg.M[i], cfg.M[i]));
    st.tx_distortion_var[i] = Eigen::MatrixXd::Zero(cfg.N[i], K);
    st.rx_distortion_var[i] = Eigen::MatrixXd::Zero(cfg.M[i], K);
    tx_sig[i].init(cfg.N[i], K);
    rx_sig[i].init(cfg.M[i], K);
    tx_chain[i].init(cfg.N[i], K);
    rx_chain[i].init(cfg.M[i], K);
  }

  PerDirection<Mat> symbols, v_freq, x_freq;
  for (long b = 0; b < n_blocks; ++b) {
    for (int j = 0; j < kDirections; ++j) {
      symbols[j].resize(cfg.d[j], K);
      for (int k = 0; k < K; ++k)
        for (int s = 0; s < cfg.d[j]; ++s) symbols[j](s, k) = cn(1.0);
      v_freq[j].resize(cfg.N[j], K);
      for (int k = 0; k < K; ++k) {
        v_freq[j].col(k) = design.V[j][static_cast<std::size_t>(k)] * symbols[j].col(k);
      }
      // Rows are chains; time = freq * F^H row-wise since F is symmetric.
      Mat v_time = v_freq[j] * Finv;
      Mat e_time(cfg.N[j], K);
      for (int m = 0; m < K; ++m)
        for (int l = 0; l < cfg.N[j]; ++l) e_time(l, m) = cn(tx_var[j](l));
      Mat e_freq = e_time * F;
      x_freq[j] = (v_time + e_time) * F;
      st.tx_distortion_var[j] += e_freq.cwiseAbs2();
      tx_sig[j].add(e_freq, v_freq[j]);
      tx_chain[j].add(e_freq);
    }
    for (int i = 0; i < kDirections; ++i) {
      const int j = other(i);
      Mat u_freq(cfg.M[i], K);
      for (int k = 0; k < K; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        Vec noise(cfg.M[i]);
        for (int l = 0; l < cfg.M[i]; ++l) noise(l) = cn(cfg.sigma2[i][kk]);
        u_freq.col(k) = h.at(i, i, k) * x_freq[i].col(k) + h.at(i, j, k) * x_freq[j].col(k) + noise;
      }
      Mat er_time(cfg.M[i], K);
      for (int m = 0; m < K; ++m)
        for (int l = 0; l < cfg.M[i]; ++l) er_time(l, m) = cn(rx_var[i](l));
      Mat er_freq = er_time * F;
      Mat y_freq = u_freq + er_freq;
      st.rx_distortion_var[i] += er_freq.cwiseAbs2();
      rx_sig[i].add(er_freq, u_freq);
      rx_chain[i].add(er_freq);
      for (int k = 0; k < K; ++k) {
        Vec nu = y_freq.col(k) - h_sic.at(i, j, k) * v_freq[j].col(k) - h.at(i, i, k) * v_freq[i].col(k);
        st.nu_covariance[i][static_cast<std::size_t>(k)] += nu * nu.adjoint();
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(n_blocks);
  for (int i = 0; i < kDirections; ++i) {
    for (auto& c : st.nu_covariance[i]) c *= inv;
    st.tx_distortion_var[i] *= inv;
    st.rx_distortion_var[i] *= inv;
    st.max_tx_signal_corr = std::max(st.max_tx_signal_corr, tx_sig[i].max_abs_corr());
    st.max_rx_signal_corr = std::max(st.max_rx_signal_corr, rx_sig[i].max_abs_corr());
    st.max_tx_chain_corr = std::max(st.max_tx_chain_corr, tx_chain[i].max_abs_corr());
    st.max_rx_chain_corr = std::max(st.max_rx_chain_corr, rx_chain[i].max_abs_corr());
  }
  return st;
}

}  // namespace fdmimo
