#include "fdmimo/channel.hpp"

#include <cmath>
#include <cstring>

namespace fdmimo {

Mat ChannelStats::si_mean(Eigen::Index rows, Eigen::Index cols) const {
  const double scale = std::sqrt(rho_si * rician_k / (1.0 + rician_k));
  if (si_mean_shape) {
    if (si_mean_shape->rows() != rows || si_mean_shape->cols() != cols) {
      throw ConfigError("SI mean matrix H0 has the wrong shape");
    }
    return scale * *si_mean_shape;
  }
  return Mat::Constant(rows, cols, cd(scale, 0.0));
}

void ChannelStats::validate() const {
  if (!(rho >= 0.0) || !(rho_si >= 0.0) || !(rician_k >= 0.0)) {
    throw ConfigError("invalid channel stats: rho, rho_si and K_R must be >= 0");
  }
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(mix_seed(master) ^ (index * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
}

Mat complex_gaussian(Eigen::Index rows, Eigen::Index cols, double var, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(var / 2.0));
  Mat m(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = n(rng);
      const double im = n(rng);
      m(r, c) = cd(re, im);
    }
  return m;
}

ChannelRealization draw_channels(const SystemConfig& cfg, const ChannelStats& stats,
                                 std::uint64_t seed) {
  cfg.validate();
  stats.validate();
  std::mt19937_64 rng(mix_seed(seed));
  ChannelRealization out;
  out.truth = ChannelSet::zeros(cfg);
  const double residual_var = stats.rho_si / (1.0 + stats.rician_k);
  for (int k = 0; k < cfg.K; ++k)
    for (int i = 0; i < kDirections; ++i)
      for (int j = 0; j < kDirections; ++j) {
        const int rows = cfg.M[i];
        const int cols = cfg.N[j];
        if (i == j) {
          out.truth.at(i, j, k) = complex_gaussian(rows, cols, stats.rho, rng);
        } else {
          out.truth.at(i, j, k) =
              stats.si_mean(rows, cols) + complex_gaussian(rows, cols, residual_var, rng);
        }
      }
  out.estimate = out.truth;
  for (int i = 0; i < kDirections; ++i)
    for (int j = 0; j < kDirections; ++j)
      out.shaping[i][j].assign(static_cast<std::size_t>(cfg.K), Mat::Identity(cfg.M[i], cfg.M[i]));
  return out;
}

CsiErrorSet perturb_csi(ChannelRealization& ch, const SystemConfig& cfg, std::uint64_t seed,
                        PerturbMode mode) {
  cfg.validate();
  ch.truth.check(cfg);
  std::mt19937_64 rng(mix_seed(seed ^ 0xc5a308d2a1f0e3b7ULL));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  CsiErrorSet errors;
  ch.estimate = ch.truth;
  for (int i = 0; i < kDirections; ++i)
    for (int j = 0; j < kDirections; ++j) {
      errors.delta[i][j].resize(static_cast<std::size_t>(cfg.K));
      for (int k = 0; k < cfg.K; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const int rows = cfg.M[i];
        const int cols = cfg.N[j];
        const double zeta = cfg.zeta[i][j][kk];
        Mat delta = Mat::Zero(rows, cols);
        if (zeta > 0.0) {
          const Mat& d = ch.shaping[i][j][kk];
          Eigen::FullPivLU<Mat> lu(d);
          if (d.rows() != rows || d.cols() != rows || !lu.isInvertible()) {
            throw ConfigError("CSI shaping matrix is singular or mis-shaped");
          }
          // Uniform direction on the sphere of the 2*rows*cols real coordinates.
          Mat dir = complex_gaussian(rows, cols, 1.0, rng);
          double nrm = dir.norm();
          while (nrm == 0.0) {
            dir = complex_gaussian(rows, cols, 1.0, rng);
            nrm = dir.norm();
          }
          double radius = zeta;
          if (mode == PerturbMode::kInterior) {
            radius = zeta * std::pow(unif(rng), 1.0 / (2.0 * rows * cols));
          }
          Mat shaped = (radius / nrm) * dir;  // this is D * Delta
          delta = lu.solve(shaped);
        }
        ch.estimate.at(i, j, k) = ch.truth.at(i, j, k) - delta;
        errors.delta[i][j][kk] = std::move(delta);
      }
    }
  return errors;
}

std::uint64_t channel_hash(const ChannelRealization& ch) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const Mat& m) {
    for (Eigen::Index n = 0; n < m.size(); ++n) {
      const double parts[2] = {m.data()[n].real(), m.data()[n].imag()};
      unsigned char bytes[sizeof(parts)];
      std::memcpy(bytes, parts, sizeof(parts));
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
      }
    }
  };
  for (const ChannelSet* set : {&ch.truth, &ch.estimate})
    for (const auto& row : set->H)
      for (const auto& per_k : row)
        for (const auto& m : per_k) feed(m);
  return h;
}

}  // namespace fdmimo
