#include "fdmimo/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace fdmimo {

namespace {

Mat weight_at(const std::optional<MatrixSet>& W, const SystemConfig& cfg, int i, int k) {
  if (W) return (*W)[i][static_cast<std::size_t>(k)];
  return Mat::Identity(cfg.d[i], cfg.d[i]);
}

void append(Vec& out, Eigen::Index& pos, const Mat& block) {
  out.segment(pos, block.size()) = block.reshaped();
  pos += block.size();
}

// Everything in the objective that depends on H_ij^k, as one residual vector
// whose squared norm is that dependent part. Each H_ij^k enters:
//  - the desired error on subcarrier k (i == j),
//  - the transmit-distortion term of Sigma_i^k,
//  - the receive-distortion term of every Sigma_i^k' (through diag),
//  - the cancellation residual (i != j; SIC uses the estimate).
class ResidualMap {
 public:
  ResidualMap(const TransceiverDesign& d, const ChannelSet& est, const SystemConfig& cfg, int i,
              int j, int k, const std::optional<MatrixSet>& W)
      : i_(i), j_(j), h_(est.at(i, j, k)), v_(d.V[j][static_cast<std::size_t>(k)]) {
    const auto kk = static_cast<std::size_t>(k);
    w_ = weight_at(W, cfg, i, k);
    t_ = d.U[i][kk] * w_;
    RealVec q = RealVec::Zero(cfg.N[j]);
    for (const auto& v : d.V[j]) q += v.rowwise().squaredNorm();
    tx_scale_ = cfg.theta_tx[j].cwiseProduct(q).cwiseSqrt().cast<cd>();
    RealVec a = RealVec::Zero(cfg.M[i]);
    for (int kp = 0; kp < cfg.K; ++kp) {
      const Mat t = d.U[i][static_cast<std::size_t>(kp)] * weight_at(W, cfg, i, kp);
      a += t.rowwise().squaredNorm();
    }
    rx_scale_ = cfg.theta_rx[i].cwiseProduct(a).cwiseSqrt().cast<cd>();

    size_ = t_.cols() * v_.cols() + t_.cols() * h_.cols() + h_.rows() * v_.cols();
  }

  Vec operator()(const Mat& delta) const {
    const Mat h = h_ + delta;
    Vec r(size_);
    Eigen::Index pos = 0;
    if (i_ == j_) append(r, pos, t_.adjoint() * h * v_ - w_.adjoint());
    else append(r, pos, t_.adjoint() * delta * v_);
    append(r, pos, t_.adjoint() * h * tx_scale_.asDiagonal());
    append(r, pos, rx_scale_.asDiagonal() * h * v_);
    return r;
  }

 private:
  int i_, j_;
  Mat h_, v_, w_, t_;
  Vec tx_scale_, rx_scale_;
  Eigen::Index size_ = 0;
};

// Spectrum of M = A^H A with A = C Dtilde normalized to unit Frobenius norm;
// the maximizer over the ball does not depend on that scale, and the
// normalization keeps nearly-switched-off designs (tiny A) out of underflow.
struct Spectrum {
  RealVec lambda;  // ascending, of the normalized M
  Mat Q;
  Vec m_hat;       // Q^H A'^H c
  Mat A;           // C Dtilde, unnormalized
  double scale = 0.0;  // ||A||_F; M = scale^2 M'
  double m_norm = 0.0;
};

Spectrum spectrum_of(const QuadraticErrorForm& f) {
  Spectrum s;
  s.A = f.C * f.Dtilde;
  s.scale = s.A.norm();
  const Eigen::Index n = s.A.cols();
  if (s.scale == 0.0) {
    s.lambda = RealVec::Zero(n);
    s.Q = Mat::Identity(n, n);
    s.m_hat = Vec::Zero(n);
    return s;
  }
  const Mat a = s.A / s.scale;
  const Mat M = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.adjoint()));
  if (es.info() != Eigen::Success) throw NumericalError("worst_case_error: eigendecomposition failed");
  s.lambda = es.eigenvalues();
  s.Q = es.eigenvectors();
  const Vec m = a.adjoint() * f.c;
  s.m_hat = s.Q.adjoint() * m;
  s.m_norm = m.norm();
  return s;
}

}  // namespace

double QuadraticErrorForm::objective(const Vec& b) const {
  return (C * (Dtilde * b) + c).squaredNorm() + remainder;
}

Mat QuadraticErrorForm::delta(const Vec& b) const {
  const Vec v = Dtilde * b;
  return v.reshaped(rows, cols);
}

QuadraticErrorForm build_quadratic_form(const TransceiverDesign& design, const ChannelRealization& real,
                                        const SystemConfig& cfg, int i, int j, int k,
                                        const std::optional<MatrixSet>& weights) {
  design.check(cfg);
  real.estimate.check(cfg);
  if (i < 0 || i >= kDirections || j < 0 || j >= kDirections || k < 0 || k >= cfg.K)
    throw ConfigError("build_quadratic_form: index out of range");

  const Mat& D = real.shaping[i][j][static_cast<std::size_t>(k)];
  Eigen::FullPivLU<Mat> lu(D);
  if (D.rows() != cfg.M[i] || D.cols() != cfg.M[i] || !lu.isInvertible())
    throw ConfigError("build_quadratic_form: shaping matrix is not invertible");
  const Mat d_inv = lu.inverse();

  QuadraticErrorForm f;
  f.rows = cfg.M[i];
  f.cols = cfg.N[j];
  const Eigen::Index n = f.rows * f.cols;
  f.Dtilde = Mat::Zero(n, n);
  for (Eigen::Index c = 0; c < f.cols; ++c) f.Dtilde.block(c * f.rows, c * f.rows, f.rows, f.rows) = d_inv;

  const ResidualMap r(design, real.estimate, cfg, i, j, k, weights);
  f.c = r(Mat::Zero(f.rows, f.cols));
  f.C.resize(f.c.size(), n);
  for (Eigen::Index col = 0; col < n; ++col) {
    Mat unit = Mat::Zero(f.rows, f.cols);
    unit(col % f.rows, col / f.rows) = 1.0;
    f.C.col(col) = r(unit) - f.c;
  }

  TransceiverDesign weighted = design;
  if (weights)
    for (int a = 0; a < kDirections; ++a)
      for (int kp = 0; kp < cfg.K; ++kp) {
        const Mat& w = (*weights)[a][static_cast<std::size_t>(kp)];
        weighted.S[a][static_cast<std::size_t>(kp)] = w * w.adjoint();
      }
  const double nominal = weighted_mse_objective(weighted, real.nominal(), cfg, weights.has_value());
  f.remainder = nominal - f.c.squaredNorm();
  return f;
}

WorstCaseResult worst_case_error(const QuadraticErrorForm& form, double zeta) {
  if (!(zeta >= 0.0) || !std::isfinite(zeta)) throw ConfigError("worst_case_error: zeta must be finite and >= 0");
  const Eigen::Index n = form.Dtilde.cols();
  WorstCaseResult res;
  if (zeta == 0.0 || n == 0) {
    res.b_star = Vec::Zero(n);
    res.value = form.c.squaredNorm();
    res.Delta_star = form.delta(res.b_star);
    return res;
  }

  const Spectrum sp = spectrum_of(form);
  // Stationarity in normalized units: (s + gap) b = A'^H c / scale.
  const Vec mt = sp.scale > 0.0 ? Vec(sp.m_hat / sp.scale) : sp.m_hat;
  const double mt_norm = sp.scale > 0.0 ? sp.m_norm / sp.scale : 0.0;
  const double lmax = sp.lambda(n - 1);
  const double top_tol = 1e-10 * std::max(std::abs(lmax), std::numeric_limits<double>::min());
  RealVec gap(n);  // lambda_max - lambda_n >= 0
  std::vector<bool> top(static_cast<std::size_t>(n));
  double top_mass = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    gap(t) = std::max(0.0, lmax - sp.lambda(t));
    top[static_cast<std::size_t>(t)] = gap(t) <= top_tol;
    if (top[static_cast<std::size_t>(t)]) top_mass += std::norm(mt(t));
  }

  auto b_at = [&](double s) {
    Vec coeff(n);
    for (Eigen::Index t = 0; t < n; ++t) coeff(t) = mt(t) / (s + gap(t));
    return coeff;
  };

  Vec coeff;
  double s = 0.0;
  const bool no_top_pull = mt_norm == 0.0 || std::sqrt(top_mass) <= 1e-10 * mt_norm;
  bool hard = false;
  if (no_top_pull) {
    coeff = Vec::Zero(n);
    for (Eigen::Index t = 0; t < n; ++t)
      if (!top[static_cast<std::size_t>(t)]) coeff(t) = mt(t) / gap(t);
    const double rest = coeff.squaredNorm();
    if (rest <= zeta * zeta) {
      hard = true;
      coeff(n - 1) = std::sqrt(zeta * zeta - rest);
    }
  }
  if (!hard) {
    // psi(s) = 1/||b(s)|| - 1/zeta is increasing and concave on s > 0;
    // safeguarded Newton from the bracket [lo, hi].
    double lo = 0.0;
    double hi = mt_norm / zeta;
    s = hi;
    for (int it = 0; it < 500; ++it) {
      coeff = b_at(s);
      const double norm_b = coeff.stableNorm();
      if (std::abs(norm_b - zeta) <= 1e-15 * zeta) break;
      if (norm_b > zeta) lo = s;
      else hi = s;
      // d/ds ||b|| = -sum |b_n|^2 / (s + gap_n) / ||b||
      double curv = 0.0;
      for (Eigen::Index t = 0; t < n; ++t) curv += std::norm(coeff(t) / norm_b) / (s + gap(t));
      const double psi = 1.0 / norm_b - 1.0 / zeta;
      const double dpsi = curv / norm_b;
      double next = s - psi / dpsi;
      if (!(next > lo && next < hi)) next = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi || next == s) break;
      s = next;
    }
    coeff = b_at(s);
  }

  res.hard_case = hard;
  res.rho_star = (lmax + s) * sp.scale * sp.scale;
  res.b_star = sp.Q * coeff;
  res.value = (sp.A * res.b_star + form.c).squaredNorm();
  res.Delta_star = form.delta(res.b_star);
  return res;
}

double dual_bound(const QuadraticErrorForm& form, double zeta, double rho) {
  const Spectrum sp = spectrum_of(form);
  double val = form.c.squaredNorm() + rho * zeta * zeta;
  const double s2 = sp.scale * sp.scale;
  for (Eigen::Index t = 0; t < sp.lambda.size(); ++t) {
    const double den = rho - s2 * sp.lambda(t);
    const double w = s2 * std::norm(sp.m_hat(t));
    if (den <= 0.0) {
      if (w == 0.0) continue;
      return std::numeric_limits<double>::infinity();
    }
    val += w / den;
  }
  return val;
}

WorstCaseAnalysis analyze_worst_case(const TransceiverDesign& design, const ChannelRealization& real,
                                     const SystemConfig& cfg, const std::optional<MatrixSet>& weights) {
  cfg.validate();
  design.check(cfg);
  WorstCaseAnalysis out;
  double increments = 0.0;
  bool have_nominal = false;
  for (int i = 0; i < kDirections; ++i)
    for (int j = 0; j < kDirections; ++j) {
      auto& deltas = out.worst_delta.delta[i][j];
      for (int k = 0; k < cfg.K; ++k) {
        const double z = cfg.zeta[i][j][static_cast<std::size_t>(k)];
        if (z == 0.0) {
          deltas.push_back(Mat::Zero(cfg.M[i], cfg.N[j]));
          continue;
        }
        const QuadraticErrorForm f = build_quadratic_form(design, real, cfg, i, j, k, weights);
        if (!have_nominal) {
          out.nominal = f.remainder + f.c.squaredNorm();
          have_nominal = true;
        }
        const WorstCaseResult wc = worst_case_error(f, z);
        increments += std::max(0.0, wc.value - f.c.squaredNorm());
        deltas.push_back(wc.Delta_star);
      }
    }
  if (!have_nominal) {
    TransceiverDesign weighted = design;
    if (weights)
      for (int a = 0; a < kDirections; ++a)
        for (int k = 0; k < cfg.K; ++k) {
          const Mat& w = (*weights)[a][static_cast<std::size_t>(k)];
          weighted.S[a][static_cast<std::size_t>(k)] = w * w.adjoint();
        }
    out.nominal = weighted_mse_objective(weighted, real.nominal(), cfg, weights.has_value());
  }
  out.worst_case = out.nominal + increments;
  return out;
}

double worst_case_mse(const TransceiverDesign& design, const ChannelRealization& real,
                      const SystemConfig& cfg, const std::optional<MatrixSet>& weights) {
  return analyze_worst_case(design, real, cfg, weights).worst_case;
}

void CuttingSetOptions::validate() const {
  if (max_cuts < 1) throw ConfigError("cutting set: max_cuts must be >= 1");
  if (!(rel_tol >= 0.0)) throw ConfigError("cutting set: rel_tol must be >= 0");
  solver.validate();
}

CuttingSetResult run_cutting_set(const ChannelRealization& real, const SystemConfig& cfg,
                                 const CuttingSetOptions& opt) {
  cfg.validate();
  opt.validate();
  std::vector<Scenario> scenarios{real.nominal()};
  CuttingSetResult res;
  double best = std::numeric_limits<double>::infinity();
  std::optional<MatrixSet> warm;

  for (int cut = 1; cut <= opt.max_cuts; ++cut) {
    DesignResult dr = run_altqcp(scenarios, cfg, opt.solver, std::nullopt, warm);
    const WorstCaseAnalysis wc = analyze_worst_case(dr.design, real, cfg);
    double design_value = 0.0;
    for (const auto& sc : scenarios)
      design_value = std::max(design_value, weighted_mse_objective(dr.design, sc, cfg, false));
    res.worst_case_trace.push_back(wc.worst_case);
    res.cuts = cut;
    if (wc.worst_case < best) {
      best = wc.worst_case;
      res.best_cut = cut;
      res.design = dr.design;
      res.report = std::move(dr.report);
    }
    // Upper bound: best worst case so far; lower estimate: the current
    // design's value on the accumulated scenario set.
    const double gap = best > 0.0 ? std::max(0.0, best - design_value) / best : 0.0;
    res.gap_trace.push_back(gap);
    if (gap < opt.rel_tol) break;

    Scenario next{real.estimate, real.estimate};
    for (int i = 0; i < kDirections; ++i)
      for (int j = 0; j < kDirections; ++j)
        for (int k = 0; k < cfg.K; ++k)
          next.channel.at(i, j, k) += wc.worst_delta.delta[i][j][static_cast<std::size_t>(k)];
    scenarios.push_back(std::move(next));
    warm = dr.design.V;
  }
  return res;
}

}  // namespace fdmimo
