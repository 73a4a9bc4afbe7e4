#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "fdmimo/altqcp.hpp"
#include "fdmimo/distortion.hpp"
#include "support.hpp"

using namespace fdmimo;
using namespace support;

TEST_CASE("DFT matrix is unitary and matches the summation definition") {
  for (int K : {1, 2, 3, 4, 8, 64}) {
    const Mat f = unitary_dft(K);
    CHECK((f.adjoint() * f - Mat::Identity(K, K)).norm() < 1e-12);
    std::mt19937_64 rng(static_cast<std::uint64_t>(K));
    const Mat x = gaussian(K, 1, rng);
    for (int k = 0; k < K; ++k) {
      cd acc = 0.0;
      for (int m = 0; m < K; ++m) acc += x(m) * std::polar(1.0, -2.0 * std::numbers::pi * m * k / K);
      CHECK(std::abs((f * x)(k) - acc / std::sqrt(double(K))) < 1e-12);
    }
    CHECK((f.adjoint() * (f * x) - x).norm() < 1e-12);
  }
  CHECK_THROWS_AS(unitary_dft(0), ConfigError);
}

TEST_CASE("frequency-domain distortion variance") {
  std::mt19937_64 rng(2);
  const SystemConfig cfg = random_config(rng);
  const TransceiverDesign d = random_design(cfg, rng);
  const RealVec got = freq_distortion_variance(d.V[0], cfg.theta_tx[0]);
  for (int l = 0; l < cfg.N[0]; ++l) {
    double q = 0.0;
    for (const auto& v : d.V[0])
      for (int s = 0; s < cfg.d[0]; ++s) q += std::norm(v(l, s));
    CHECK(got(l) == doctest::Approx(cfg.theta_tx[0](l) * q).epsilon(1e-13));
  }
}

TEST_CASE("simulated interference covariance tracks the analytic model") {
  SystemConfig cfg = SystemConfig::defaults();
  cfg.set_zeta(0.0);
  cfg.set_distortion(db_to_linear(-20.0), db_to_linear(-20.0));
  const auto real = draw_channels(cfg, ChannelStats{}, 21);
  const TransceiverDesign d = run_altqcp(real.truth, cfg).design;
  const Scenario world = Scenario::perfect(real.truth);
  const DistortionStats st = simulate_blocks(d, world, cfg, 20000, 3);
  for (int i = 0; i < kDirections; ++i)
    for (int k = 0; k < cfg.K; ++k) {
      const Mat ref = oracle_covariance(d.V, real.truth, cfg, i, k);
      CHECK((st.nu_covariance[i][static_cast<std::size_t>(k)] - ref).norm() < 0.05 * ref.norm());
    }
  // Distortion is uncorrelated with the signal and across chains.
  CHECK(st.max_tx_signal_corr < 0.05);
  CHECK(st.max_rx_signal_corr < 0.05);
  CHECK(st.max_tx_chain_corr < 0.05);
  CHECK(st.max_rx_chain_corr < 0.05);
}

TEST_CASE("distortion power spreads evenly over subcarriers") {
  SystemConfig cfg = SystemConfig::defaults();
  cfg.set_distortion(0.05, 0.05);
  std::mt19937_64 rng(8);
  const ChannelSet ch = random_channels(cfg, rng);
  TransceiverDesign d = random_design(cfg, rng);
  // Concentrate the signal on one subcarrier: distortion must still be flat.
  for (int k = 1; k < cfg.K; ++k) d.V[0][static_cast<std::size_t>(k)] *= 0.1;
  const DistortionStats st = simulate_blocks(d, Scenario::perfect(ch), cfg, 20000, 4);
  const RealVec expect = freq_distortion_variance(d.V[0], cfg.theta_tx[0]);
  for (int l = 0; l < cfg.N[0]; ++l)
    for (int k = 0; k < cfg.K; ++k) CHECK(st.tx_distortion_var[0](l, k) == doctest::Approx(expect(l)).epsilon(0.05));
}

TEST_CASE("without distortion only thermal noise remains") {
  SystemConfig cfg = SystemConfig::defaults();
  cfg.set_distortion(0.0, 0.0);
  std::mt19937_64 rng(9);
  const ChannelSet ch = random_channels(cfg, rng);
  const TransceiverDesign d = random_design(cfg, rng);
  const DistortionStats st = simulate_blocks(d, Scenario::perfect(ch), cfg, 20000, 5);
  for (int i = 0; i < kDirections; ++i)
    for (int k = 0; k < cfg.K; ++k) {
      const Mat ref = cfg.sigma2[i][static_cast<std::size_t>(k)] * Mat::Identity(2, 2);
      CHECK((st.nu_covariance[i][static_cast<std::size_t>(k)] - ref).norm() < 0.05 * ref.norm());
    }
}

TEST_CASE("simulation is deterministic and validates its inputs") {
  const SystemConfig cfg = SystemConfig::defaults();
  std::mt19937_64 rng(1);
  const ChannelSet ch = random_channels(cfg, rng);
  const TransceiverDesign d = random_design(cfg, rng);
  const auto a = simulate_blocks(d, Scenario::perfect(ch), cfg, 50, 7);
  const auto b = simulate_blocks(d, Scenario::perfect(ch), cfg, 50, 7);
  CHECK(a.nu_covariance[1][2] == b.nu_covariance[1][2]);
  CHECK_THROWS_AS(simulate_blocks(d, Scenario::perfect(ch), cfg, 0, 7), ConfigError);
}
