#include "fdmimo/wmmse.hpp"

#include <chrono>
#include <cmath>

#include "fdmimo/linalg.hpp"

namespace fdmimo {

namespace {

MatrixSet error_matrices(const TransceiverDesign& d, const Scenario& sc, const SystemConfig& cfg) {
  MatrixSet sigma = aggregate_covariances(d.V, sc, cfg);
  MatrixSet E;
  for (int i = 0; i < kDirections; ++i)
    for (int k = 0; k < cfg.K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      E[i].push_back(mse_matrix(d.U[i][kk], d.V[i][kk], sigma[i][kk], sc.channel.at(i, i, k)));
    }
  return E;
}

MatrixSet scaled_weights(const MatrixSet& S, const PerDirection<double>& omega) {
  MatrixSet out = S;
  for (int i = 0; i < kDirections; ++i)
    for (auto& s : out[i]) s *= omega[i];
  return out;
}

}  // namespace

MatrixSet update_weights(const TransceiverDesign& design, const ChannelSet& ch, const SystemConfig& cfg) {
  design.check(cfg);
  MatrixSet E = error_matrices(design, Scenario::perfect(ch), cfg);
  MatrixSet S;
  for (int i = 0; i < kDirections; ++i)
    for (const auto& e : E[i]) {
      if (linalg::min_eigenvalue(e) <= 0.0) throw NumericalError("update_weights: singular MSE matrix");
      S[i].push_back(linalg::hpd_inverse(e));
    }
  return S;
}

double surrogate_objective(const TransceiverDesign& design, const ChannelSet& ch, const SystemConfig& cfg) {
  design.check(cfg);
  MatrixSet E = error_matrices(design, Scenario::perfect(ch), cfg);
  double total = 0.0;
  for (int i = 0; i < kDirections; ++i) {
    double dir = 0.0;
    for (int k = 0; k < cfg.K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const Mat& s = design.S[i][kk];
      dir += linalg::hpd_logdet(s) + cfg.d[i] - (s * E[i][kk]).trace().real();
    }
    total += cfg.omega[i] * dir;
  }
  return total;
}

double weighted_sum_rate(const MatrixSet& V, const Scenario& sc, const SystemConfig& cfg) {
  MatrixSet sigma = aggregate_covariances(V, sc, cfg);
  double total = 0.0;
  for (int i = 0; i < kDirections; ++i)
    for (int k = 0; k < cfg.K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      total += cfg.omega[i] * rate(V[i][kk], sigma[i][kk], sc.channel.at(i, i, k));
    }
  return total;
}

WmmseResult run_wmmse(const ChannelSet& ch, const SystemConfig& cfg, const SolverOptions& opt,
                      const std::optional<MatrixSet>& initial_V, std::optional<SiPowerLimit> si_limit) {
  cfg.validate();
  opt.validate();
  ch.check(cfg);
  const Scenario sc = Scenario::perfect(ch);
  const std::span<const Scenario> scenarios(&sc, 1);

  using clock = std::chrono::steady_clock;
  WmmseResult res;
  TransceiverDesign& d = res.design;
  d = TransceiverDesign::zeros(cfg);
  d.V = initial_V ? *initial_V : init_precoders(ch, cfg, opt);
  d.check(cfg);
  d.U = update_receivers(d.V, scenarios, cfg);
  d.S = update_weights(d, ch, cfg);

  double prev = surrogate_objective(d, ch, cfg);
  res.block_surrogate.push_back(prev);
  res.report.objective_trace.push_back(weighted_sum_rate(d.V, sc, cfg));

  for (int it = 1; it <= opt.max_iters; ++it) {
    const auto t0 = clock::now();
    PrecoderUpdate pu = update_precoders(d.U, scaled_weights(d.S, cfg.omega), scenarios, cfg, opt, si_limit);
    d.V = std::move(pu.V);
    d.iota = pu.iota;
    res.block_surrogate.push_back(surrogate_objective(d, ch, cfg));
    d.U = update_receivers(d.V, scenarios, cfg);
    res.block_surrogate.push_back(surrogate_objective(d, ch, cfg));
    d.S = update_weights(d, ch, cfg);
    const double cur = surrogate_objective(d, ch, cfg);
    res.block_surrogate.push_back(cur);
    res.report.objective_trace.push_back(weighted_sum_rate(d.V, sc, cfg));
    res.report.iteration_seconds.push_back(std::chrono::duration<double>(clock::now() - t0).count());
    res.report.iterations = it;
    const double change = std::abs(cur - prev) / std::max(std::abs(prev), 1e-300);
    prev = cur;
    if (change < opt.rel_tol) {
      res.report.converged = true;
      break;
    }
  }
  PerformanceReport summary = evaluate(d, sc, cfg);
  res.report.mse = std::move(summary.mse);
  res.report.rate = std::move(summary.rate);
  res.report.power = summary.power;
  return res;
}

}  // namespace fdmimo
