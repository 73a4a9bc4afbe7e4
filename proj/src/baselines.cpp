#include "fdmimo/baselines.hpp"

#include <cmath>

namespace fdmimo {

namespace {

void zero_cross(ChannelSet& ch) {
  for (int i = 0; i < kDirections; ++i)
    for (auto& h : ch.H[i][other(i)]) h.setZero();
}

SystemConfig distortion_free(SystemConfig cfg) {
  for (int i = 0; i < kDirections; ++i) {
    cfg.theta_tx[i].setZero();
    cfg.theta_rx[i].setZero();
  }
  return cfg;
}

// K = 1 problem whose design, repeated on every subcarrier, spends the full
// budget and sees the same per-chain distortion as the K-carrier link.
SystemConfig single_carrier_config(const SystemConfig& cfg) {
  SystemConfig sc = cfg;
  sc.K = 1;
  const double K = cfg.K;
  for (int i = 0; i < kDirections; ++i) {
    sc.P[i] = cfg.P[i] / K;
    sc.theta_tx[i] = cfg.theta_tx[i] * K;
    sc.theta_rx[i] = cfg.theta_rx[i] * K;
    double mean = 0.0;
    for (double s : cfg.sigma2[i]) mean += s;
    sc.sigma2[i] = {mean / K};
    for (int j = 0; j < kDirections; ++j) sc.zeta[i][j] = {0.0};
  }
  return sc;
}

ChannelSet subcarrier_mean(const ChannelSet& ch, const SystemConfig& cfg) {
  ChannelSet out;
  out.K = 1;
  for (int i = 0; i < kDirections; ++i)
    for (int j = 0; j < kDirections; ++j) {
      Mat acc = Mat::Zero(cfg.M[i], cfg.N[j]);
      for (const auto& h : ch.H[i][j]) acc += h;
      out.H[i][j] = {acc / static_cast<double>(cfg.K)};
    }
  return out;
}

TransceiverDesign replicate(const TransceiverDesign& d, int K) {
  TransceiverDesign out;
  out.iota = d.iota;
  for (int i = 0; i < kDirections; ++i) {
    out.V[i].assign(static_cast<std::size_t>(K), d.V[i].front());
    out.U[i].assign(static_cast<std::size_t>(K), d.U[i].front());
    out.S[i].assign(static_cast<std::size_t>(K), d.S[i].front());
  }
  return out;
}

// A blind designer budgets signal power only; scale into the true budget,
// which also counts the transmit distortion.
void fit_true_budget(TransceiverDesign& d, const SystemConfig& cfg) {
  for (int i = 0; i < kDirections; ++i) {
    const double used = power_usage(d.V[i], cfg.theta_tx[i], cfg.K);
    if (used > cfg.P[i]) {
      const double a = std::sqrt(cfg.P[i] / used);
      for (auto& v : d.V[i]) v *= a;
    }
  }
}

void copy_trace(PerformanceReport& to, PerformanceReport& from) {
  to.objective_trace = std::move(from.objective_trace);
  to.iteration_seconds = std::move(from.iteration_seconds);
  to.iterations = from.iterations;
  to.converged = from.converged;
}

}  // namespace

ChannelRealization half_duplex_view(const ChannelRealization& real) {
  ChannelRealization hd = real;
  zero_cross(hd.truth);
  zero_cross(hd.estimate);
  return hd;
}

SystemConfig half_duplex_config(const SystemConfig& cfg) {
  SystemConfig hd = cfg;
  for (int i = 0; i < kDirections; ++i)
    std::fill(hd.zeta[i][other(i)].begin(), hd.zeta[i][other(i)].end(), 0.0);
  return hd;
}

DesignRun design_for(const ChannelSet& ch, const SystemConfig& cfg, const BaselineOptions& opt,
                     std::optional<SiPowerLimit> si_limit) {
  if (opt.objective == DesignObjective::kRate) {
    WmmseResult r = run_wmmse(ch, cfg, opt.solver, std::nullopt, si_limit);
    return {std::move(r.design), std::move(r.report)};
  }
  const Scenario sc = Scenario::perfect(ch);
  DesignResult r = run_altqcp(std::span<const Scenario>(&sc, 1), cfg, opt.solver, std::nullopt,
                              std::nullopt, si_limit);
  return {std::move(r.design), std::move(r.report)};
}

BaselineResult run_baseline(BaselineMode mode, const ChannelRealization& real, const SystemConfig& cfg,
                            const BaselineOptions& opt) {
  cfg.validate();
  BaselineResult res;
  DesignRun run;
  switch (mode) {
    case BaselineMode::kHalfDuplex: {
      const ChannelRealization hd = half_duplex_view(real);
      const SystemConfig hd_cfg = half_duplex_config(cfg);
      run = design_for(hd.estimate, hd_cfg, opt);
      res.design = std::move(run.design);
      res.report = evaluate(res.design, hd.world(), hd_cfg);
      for (auto& per_dir : res.report.rate)
        for (double& r : per_dir) r *= kHalfDuplexShare;
      res.worst_case_mse = worst_case_mse(res.design, hd, hd_cfg);
      copy_trace(res.report, run.report);
      return res;
    }
    case BaselineMode::kKappa0:
      run = design_for(real.estimate, distortion_free(cfg), opt);
      res.design = std::move(run.design);
      fit_true_budget(res.design, cfg);
      break;
    case BaselineMode::kSingleCarrier: {
      run = design_for(subcarrier_mean(real.estimate, cfg), single_carrier_config(cfg), opt);
      res.design = replicate(run.design, cfg.K);
      break;
    }
    case BaselineMode::kSiThreshold: {
      if (!(opt.si_threshold > 0.0)) throw ConfigError("SI power threshold must be > 0");
      std::optional<SiPowerLimit> limit;
      if (std::isfinite(opt.si_threshold)) limit = SiPowerLimit{opt.si_threshold};
      run = design_for(real.estimate, distortion_free(cfg), opt, limit);
      res.design = std::move(run.design);
      fit_true_budget(res.design, cfg);
      break;
    }
  }
  res.report = evaluate(res.design, real.world(), cfg);
  res.worst_case_mse = worst_case_mse(res.design, real, cfg);
  copy_trace(res.report, run.report);
  return res;
}

}  // namespace fdmimo
