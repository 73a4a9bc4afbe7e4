#include "fdmimo/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace fdmimo {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view s, std::string_view original) {
  // from_chars rejects a leading '+', and users write "+3dB".
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("cannot parse numeric value '" + std::string(original) + "'");
  }
  return value;
}

}  // namespace

double parse_linear(std::string_view text) {
  auto s = trim(text);
  if (s.size() >= 2) {
    auto tail = s.substr(s.size() - 2);
    if ((tail[0] == 'd' || tail[0] == 'D') && (tail[1] == 'b' || tail[1] == 'B')) {
      return db_to_linear(parse_number(trim(s.substr(0, s.size() - 2)), text));
    }
  }
  return parse_number(s, text);
}

SystemConfig SystemConfig::uniform(int K, int antennas, int streams, double power, double sigma2,
                                   double kappa, double beta, double zeta) {
  SystemConfig c;
  c.K = K;
  c.N = {antennas, antennas};
  c.M = {antennas, antennas};
  c.d = {streams, streams};
  c.P = {power, power};
  c.set_noise(sigma2);
  c.set_distortion(kappa, beta);
  c.set_zeta(zeta);
  return c;
}

SystemConfig SystemConfig::defaults() {
  return uniform(4, 2, 1, 1.0, db_to_linear(-30.0), db_to_linear(-30.0), db_to_linear(-30.0),
                 db_to_linear(-15.0));
}

void SystemConfig::set_noise(double sigma2_linear) {
  for (auto& s : sigma2) s.assign(static_cast<std::size_t>(K), sigma2_linear);
}

void SystemConfig::set_distortion(double kappa, double beta) {
  for (int i = 0; i < kDirections; ++i) {
    theta_tx[i] = RealVec::Constant(N[i], kappa / K);
    theta_rx[i] = RealVec::Constant(M[i], beta / K);
  }
}

void SystemConfig::set_zeta(double zeta_linear) {
  for (auto& row : zeta)
    for (auto& z : row) z.assign(static_cast<std::size_t>(K), zeta_linear);
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid config: " + what); };
  if (K < 1) fail("K must be >= 1");
  if (max_iters < 1) fail("max_iters must be >= 1");
  if (!(rel_tol > 0.0)) fail("rel_tol must be > 0");
  for (int i = 0; i < kDirections; ++i) {
    std::string tag = "direction " + std::to_string(i + 1) + ": ";
    if (N[i] < 1 || M[i] < 1 || d[i] < 1) fail(tag + "dimensions must be >= 1");
    if (d[i] > std::min(N[i], M[i])) fail(tag + "d must not exceed min(N, M)");
    if (!(P[i] >= 0.0) || !std::isfinite(P[i])) fail(tag + "P must be finite and >= 0");
    if (!(omega[i] > 0.0)) fail(tag + "omega must be > 0");
    if (static_cast<int>(sigma2[i].size()) != K) fail(tag + "sigma2 must have K entries");
    for (double s : sigma2[i])
      if (!(s >= 0.0)) fail(tag + "sigma2 must be >= 0");
    if (theta_tx[i].size() != N[i]) fail(tag + "theta_tx must have N entries");
    if (theta_rx[i].size() != M[i]) fail(tag + "theta_rx must have M entries");
    if ((theta_tx[i].array() < 0.0).any() || (theta_rx[i].array() < 0.0).any())
      fail(tag + "distortion coefficients must be >= 0");
    for (int j = 0; j < kDirections; ++j) {
      if (static_cast<int>(zeta[i][j].size()) != K) fail(tag + "zeta must have K entries");
      for (double z : zeta[i][j])
        if (!(z >= 0.0)) fail(tag + "zeta must be >= 0");
    }
  }
}

}  // namespace fdmimo
