#include "fdmimo/altqcp.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "fdmimo/channel.hpp"
#include "fdmimo/linalg.hpp"

namespace fdmimo {

void SolverOptions::validate() const {
  if (max_iters < 1) throw ConfigError("solver: max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw ConfigError("solver: rel_tol must be > 0");
  if (!(dual_tol > 0.0)) throw ConfigError("solver: dual_tol must be > 0");
}

MatrixSet init_precoders(const ChannelSet& ch, const SystemConfig& cfg, const SolverOptions& opt) {
  cfg.validate();
  ch.check(cfg);
  std::mt19937_64 rng(mix_seed(opt.seed ^ 0x5bd1e995ULL));
  MatrixSet V;
  for (int i = 0; i < kDirections; ++i) {
    V[i].reserve(static_cast<std::size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) {
      if (opt.init == InitMode::kRightSingular) {
        Eigen::JacobiSVD<Mat> svd(ch.at(i, i, k), Eigen::ComputeFullV);
        V[i].push_back(svd.matrixV().leftCols(cfg.d[i]));
      } else {
        V[i].push_back(complex_gaussian(cfg.N[i], cfg.d[i], 1.0, rng));
      }
    }
    const double used = power_usage(V[i], cfg.theta_tx[i], cfg.K);
    const double scale = used > 0.0 ? std::sqrt(cfg.P[i] / used) : 0.0;
    for (auto& v : V[i]) v *= scale;
  }
  return V;
}

MatrixSet update_receivers(const MatrixSet& V, const ChannelSet& ch, const SystemConfig& cfg) {
  const Scenario sc = Scenario::perfect(ch);
  return update_receivers(V, std::span<const Scenario>(&sc, 1), cfg);
}

MatrixSet update_receivers(const MatrixSet& V, std::span<const Scenario> scenarios,
                           const SystemConfig& cfg) {
  if (scenarios.empty()) throw ConfigError("update_receivers: empty scenario set");
  const double inv_t = 1.0 / static_cast<double>(scenarios.size());
  std::vector<MatrixSet> sigmas;
  sigmas.reserve(scenarios.size());
  for (const auto& sc : scenarios) sigmas.push_back(aggregate_covariances(V, sc, cfg));
  MatrixSet U;
  for (int i = 0; i < kDirections; ++i) {
    U[i].reserve(static_cast<std::size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      Mat lhs = Mat::Zero(cfg.M[i], cfg.M[i]);
      Mat rhs = Mat::Zero(cfg.M[i], cfg.d[i]);
      for (std::size_t t = 0; t < scenarios.size(); ++t) {
        Mat hv = scenarios[t].channel.at(i, i, k) * V[i][kk];
        lhs += sigmas[t][i][kk] + hv * hv.adjoint();
        rhs += hv;
      }
      U[i].push_back(linalg::hpd_solve(lhs * inv_t, rhs * inv_t));
    }
  }
  return U;
}

namespace {

// A_j^l = U_j^l S_j^l U_j^l^H
MatrixSet receive_weights(const MatrixSet& U, const MatrixSet& S) {
  MatrixSet A;
  for (int j = 0; j < kDirections; ++j)
    for (std::size_t l = 0; l < U[j].size(); ++l) {
      A[j].push_back(linalg::hermitian_part(U[j][l] * S[j][l] * U[j][l].adjoint()));
    }
  return A;
}

Mat leakage_from_weights(const MatrixSet& A, const ChannelSet& ch, const SystemConfig& cfg, int i,
                         int k) {
  Mat J = Mat::Zero(cfg.N[i], cfg.N[i]);
  RealVec tx_diag = RealVec::Zero(cfg.N[i]);
  for (int j = 0; j < kDirections; ++j) {
    RealVec a_diag = RealVec::Zero(cfg.M[j]);
    for (int l = 0; l < cfg.K; ++l) {
      const auto ll = static_cast<std::size_t>(l);
      a_diag += A[j][ll].diagonal().real();
      const Mat& h = ch.at(j, i, l);
      tx_diag += (h.adjoint() * A[j][ll] * h).diagonal().real();
    }
    const Mat& h = ch.at(j, i, k);
    J += h.adjoint() * cfg.theta_rx[j].cwiseProduct(a_diag).cast<cd>().asDiagonal() * h;
  }
  J.diagonal() += cfg.theta_tx[i].cwiseProduct(tx_diag).cast<cd>();
  return linalg::hermitian_part(J);
}

// The per-direction quadratic program
//   min sum_k tr(V_k^H B_k V_k) - 2 Re tr(G_k^H V_k)
//   s.t. sum_k tr(D V_k V_k^H) <= P,  [sum_k tr(V_k^H C_k V_k) <= P_th]
// with D = I + K Theta_tx diagonal.
struct DirectionProblem {
  std::vector<Mat> B, G, C;
  RealVec d_inv_sqrt;
  double P = 0.0;
};

// Spectral form of the problem for a fixed SI multiplier mu.
class DirectionSpectrum {
 public:
  DirectionSpectrum(const DirectionProblem& prob, double mu) {
    const auto K = prob.B.size();
    basis_.resize(K);
    lambda_.resize(K);
    proj_.resize(K);
    weight_.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      Mat b = prob.B[k];
      if (mu > 0.0) b += mu * prob.C[k];
      const Vec scale = prob.d_inv_sqrt.cast<cd>();
      Mat bh = linalg::hermitian_part(scale.asDiagonal() * b * scale.asDiagonal());
      Eigen::SelfAdjointEigenSolver<Mat> es(bh);
      basis_[k] = scale.asDiagonal() * es.eigenvectors();
      lambda_[k] = es.eigenvalues().cwiseMax(0.0);
      proj_[k] = es.eigenvectors().adjoint() * (scale.asDiagonal() * prob.G[k]);
      const double lmax = lambda_[k].size() ? lambda_[k].maxCoeff() : 0.0;
      const double gnorm = proj_[k].norm();
      const double tol = std::max(linalg::kRidge * lmax, std::numeric_limits<double>::min());
      weight_[k] = proj_[k].rowwise().squaredNorm();
      for (Eigen::Index n = 0; n < lambda_[k].size(); ++n) {
        if (lambda_[k](n) <= tol) {
          lambda_[k](n) = 0.0;
          // Round-off leaking into a flat direction carries no objective.
          if (std::sqrt(weight_[k](n)) <= 1e-10 * gnorm) {
            proj_[k].row(n).setZero();
            weight_[k](n) = 0.0;
          }
        }
      }
    }
  }

  double power(double iota) const {
    double p = 0.0;
    for (std::size_t k = 0; k < lambda_.size(); ++k)
      for (Eigen::Index n = 0; n < lambda_[k].size(); ++n) {
        if (weight_[k](n) == 0.0) continue;
        const double den = lambda_[k](n) + iota;
        if (den <= 0.0) return std::numeric_limits<double>::infinity();
        p += weight_[k](n) / (den * den);
      }
    return p;
  }

  double total_weight() const {
    double s = 0.0;
    for (const auto& w : weight_) s += w.sum();
    return s;
  }

  std::vector<Mat> precoders(double iota) const {
    std::vector<Mat> V(lambda_.size());
    for (std::size_t k = 0; k < lambda_.size(); ++k) {
      RealVec inv(lambda_[k].size());
      for (Eigen::Index n = 0; n < inv.size(); ++n) {
        const double den = lambda_[k](n) + iota;
        inv(n) = (weight_[k](n) == 0.0 || den <= 0.0) ? 0.0 : 1.0 / den;
      }
      V[k] = basis_[k] * (inv.cast<cd>().asDiagonal() * proj_[k]);
    }
    return V;
  }

 private:
  std::vector<Mat> basis_;      // D^{-1/2} Q
  std::vector<RealVec> lambda_;
  std::vector<Mat> proj_;       // Q^H D^{-1/2} G
  std::vector<RealVec> weight_; // row energies of proj_
};

struct DualSolution {
  std::vector<Mat> V;
  double iota = 0.0;
};

// Power-constraint multiplier by bisection on the monotone residual.
DualSolution solve_power_dual(const DirectionSpectrum& spec, double P, double dual_tol) {
  DualSolution out;
  if (P <= 0.0) {
    out.V = spec.precoders(std::numeric_limits<double>::infinity());
    return out;
  }
  if (spec.power(0.0) <= P) {
    out.V = spec.precoders(0.0);
    return out;
  }
  const double total = spec.total_weight();
  if (!std::isfinite(total)) throw NumericalError("precoder update: non-finite problem data");
  // power(iota) <= total / iota^2, so this bound is feasible from the start.
  double hi = std::sqrt(total / P) * (1.0 + 1e-9);
  if (!(hi > 0.0)) hi = 1e-300;
  int doublings = 0;
  while (!(spec.power(hi) <= P)) {
    hi *= 2.0;
    if (++doublings > 60) throw NumericalError("precoder update: dual bracket expansion failed");
  }
  double lo = 0.0;
  for (int it = 0; it < 400; ++it) {
    const double residual = P - spec.power(hi);
    if (residual <= std::min(dual_tol, 1e-13 * std::max(P, 1.0))) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (spec.power(mid) > P) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.iota = hi;
  out.V = spec.precoders(hi);
  return out;
}

double si_power(const std::vector<Mat>& V, const DirectionProblem& prob) {
  double s = 0.0;
  for (std::size_t k = 0; k < V.size(); ++k) s += (V[k].adjoint() * prob.C[k] * V[k]).trace().real();
  return s;
}

}  // namespace

Mat leakage_matrix(const MatrixSet& U, const MatrixSet& S, const ChannelSet& ch,
                   const SystemConfig& cfg, int i, int k) {
  ch.check(cfg);
  if (i < 0 || i >= kDirections || k < 0 || k >= cfg.K) throw ConfigError("leakage_matrix: index out of range");
  return leakage_from_weights(receive_weights(U, S), ch, cfg, i, k);
}

PrecoderUpdate update_precoders(const MatrixSet& U, const MatrixSet& S, const ChannelSet& ch,
                                const SystemConfig& cfg, const SolverOptions& opt) {
  const Scenario sc = Scenario::perfect(ch);
  return update_precoders(U, S, std::span<const Scenario>(&sc, 1), cfg, opt);
}

PrecoderUpdate update_precoders(const MatrixSet& U, const MatrixSet& S,
                                std::span<const Scenario> scenarios, const SystemConfig& cfg,
                                const SolverOptions& opt, std::optional<SiPowerLimit> si_limit) {
  if (scenarios.empty()) throw ConfigError("update_precoders: empty scenario set");
  if (si_limit && !(si_limit->threshold > 0.0)) {
    throw ConfigError("SI power threshold must be > 0");
  }
  const double inv_t = 1.0 / static_cast<double>(scenarios.size());
  const MatrixSet A = receive_weights(U, S);
  PrecoderUpdate out;
  for (int i = 0; i < kDirections; ++i) {
    const int j = other(i);
    DirectionProblem prob;
    prob.P = cfg.P[i];
    prob.d_inv_sqrt = (RealVec::Ones(cfg.N[i]) + cfg.K * cfg.theta_tx[i]).cwiseSqrt().cwiseInverse();
    for (int k = 0; k < cfg.K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      Mat b = Mat::Zero(cfg.N[i], cfg.N[i]);
      Mat g = Mat::Zero(cfg.N[i], cfg.d[i]);
      Mat c = Mat::Zero(cfg.N[i], cfg.N[i]);
      for (const auto& sc : scenarios) {
        const Mat& h = sc.channel.at(i, i, k);
        b += leakage_from_weights(A, sc.channel, cfg, i, k) + h.adjoint() * A[i][kk] * h;
        if (sc.sic_estimate) {
          Mat r = sc.channel.at(j, i, k) - sc.sic_estimate->at(j, i, k);
          b += r.adjoint() * A[j][kk] * r;
        }
        g += h.adjoint() * U[i][kk] * S[i][kk];
        if (si_limit) c += sc.channel.at(j, i, k).adjoint() * sc.channel.at(j, i, k);
      }
      prob.B.push_back(linalg::hermitian_part(b * inv_t));
      prob.G.push_back(g * inv_t);
      prob.C.push_back(linalg::hermitian_part(c * inv_t));
    }

    DualSolution sol = solve_power_dual(DirectionSpectrum(prob, 0.0), prob.P, opt.dual_tol);
    double mu = 0.0;
    if (si_limit && std::isfinite(si_limit->threshold) && si_power(sol.V, prob) > si_limit->threshold) {
      double ctr = 0.0, btr = 0.0;
      for (int k = 0; k < cfg.K; ++k) {
        ctr += prob.C[static_cast<std::size_t>(k)].trace().real();
        btr += prob.B[static_cast<std::size_t>(k)].trace().real();
      }
      double hi = ctr > 0.0 ? std::max(btr / ctr, 1e-12) : 1.0;
      DualSolution hi_sol = solve_power_dual(DirectionSpectrum(prob, hi), prob.P, opt.dual_tol);
      int doublings = 0;
      bool feasible = true;
      while (si_power(hi_sol.V, prob) > si_limit->threshold) {
        if (++doublings > 60) {
          feasible = false;
          break;
        }
        hi *= 2.0;
        hi_sol = solve_power_dual(DirectionSpectrum(prob, hi), prob.P, opt.dual_tol);
      }
      if (!feasible) {
        // No multiplier reaches the cap: fall back to a silent transmitter.
        sol.V.assign(static_cast<std::size_t>(cfg.K), Mat::Zero(cfg.N[i], cfg.d[i]));
        sol.iota = 0.0;
        mu = std::numeric_limits<double>::infinity();
      } else {
        double lo = 0.0;
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          DualSolution mid_sol = solve_power_dual(DirectionSpectrum(prob, mid), prob.P, opt.dual_tol);
          if (si_power(mid_sol.V, prob) > si_limit->threshold) {
            lo = mid;
          } else {
            hi = mid;
            hi_sol = std::move(mid_sol);
          }
          if (hi - lo <= 1e-12 * hi) break;
        }
        sol = std::move(hi_sol);
        mu = hi;
      }
    }
    out.V[i] = std::move(sol.V);
    out.iota[i] = sol.iota;
    out.mu[i] = mu;
  }
  return out;
}

DesignResult run_altqcp(const ChannelSet& ch, const SystemConfig& cfg, const SolverOptions& opt) {
  const Scenario sc = Scenario::perfect(ch);
  return run_altqcp(std::span<const Scenario>(&sc, 1), cfg, opt, std::nullopt, std::nullopt);
}

DesignResult run_altqcp(std::span<const Scenario> scenarios, const SystemConfig& cfg,
                        const SolverOptions& opt, const std::optional<MatrixSet>& weights,
                        const std::optional<MatrixSet>& initial_V,
                        std::optional<SiPowerLimit> si_limit) {
  cfg.validate();
  opt.validate();
  if (scenarios.empty()) throw ConfigError("run_altqcp: empty scenario set");
  for (const auto& sc : scenarios) sc.channel.check(cfg);

  using clock = std::chrono::steady_clock;
  DesignResult res;
  TransceiverDesign& d = res.design;
  d = TransceiverDesign::zeros(cfg);
  if (weights) d.S = *weights;
  d.V = initial_V ? *initial_V : init_precoders(scenarios.front().channel, cfg, opt);
  d.U = update_receivers(d.V, scenarios, cfg);
  d.check(cfg);

  auto objective = [&] { return average_weighted_mse(d, scenarios, cfg, true); };
  double prev = objective();
  res.report.objective_trace.push_back(prev);
  res.diagnostics.half_step_objective.push_back(prev);

  for (int it = 1; it <= opt.max_iters; ++it) {
    const auto t0 = clock::now();
    PrecoderUpdate pu = update_precoders(d.U, d.S, scenarios, cfg, opt, si_limit);
    d.V = std::move(pu.V);
    d.iota = pu.iota;
    for (int i = 0; i < kDirections; ++i) {
      const double excess = power_usage(d.V[i], cfg.theta_tx[i], cfg.K) - cfg.P[i];
      res.diagnostics.max_power_excess = std::max(res.diagnostics.max_power_excess, excess);
      res.diagnostics.max_slackness = std::max(res.diagnostics.max_slackness, std::abs(d.iota[i] * excess));
    }
    res.diagnostics.half_step_objective.push_back(objective());
    d.U = update_receivers(d.V, scenarios, cfg);
    const double cur = objective();
    res.diagnostics.half_step_objective.push_back(cur);
    res.report.objective_trace.push_back(cur);
    res.report.iteration_seconds.push_back(std::chrono::duration<double>(clock::now() - t0).count());
    res.report.iterations = it;
    const double change = std::abs(prev - cur) / std::max(std::abs(prev), 1e-300);
    prev = cur;
    if (change < opt.rel_tol) {
      res.report.converged = true;
      break;
    }
  }
  PerformanceReport summary = evaluate(d, scenarios.front(), cfg);
  res.report.mse = std::move(summary.mse);
  res.report.rate = std::move(summary.rate);
  res.report.power = summary.power;
  return res;
}

}  // namespace fdmimo
