#include "fdmimo/channel_io.hpp"

namespace fdmimo {

using nlohmann::json;

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.front().size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError("matrix rows must have equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& e = row[static_cast<std::size_t>(c)];
      if (!e.is_array() || e.size() != 2) throw ConfigError("matrix entries must be [re, im] pairs");
      m(r, c) = cd(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

namespace {

template <class Grid>
json grid_to_json(const Grid& g) {
  json out = json::array();
  for (const auto& row : g) {
    json jr = json::array();
    for (const auto& per_k : row) {
      json jk = json::array();
      for (const auto& m : per_k) jk.push_back(matrix_to_json(m));
      jr.push_back(std::move(jk));
    }
    out.push_back(std::move(jr));
  }
  return out;
}

template <class Grid>
void grid_from_json(const json& j, Grid& g, int K, const char* name) {
  if (!j.is_array() || j.size() != kDirections) {
    throw ConfigError(std::string("'") + name + "' must be a 2x2xK array of matrices");
  }
  for (int i = 0; i < kDirections; ++i) {
    const auto& jr = j[static_cast<std::size_t>(i)];
    if (!jr.is_array() || jr.size() != kDirections) {
      throw ConfigError(std::string("'") + name + "' must be a 2x2xK array of matrices");
    }
    for (int jj = 0; jj < kDirections; ++jj) {
      const auto& jk = jr[static_cast<std::size_t>(jj)];
      if (!jk.is_array() || static_cast<int>(jk.size()) != K) {
        throw ConfigError(std::string("'") + name + "' needs K matrices per (i, j)");
      }
      auto& dst = g[i][jj];
      dst.clear();
      for (const auto& m : jk) dst.push_back(matrix_from_json(m));
    }
  }
}

}  // namespace

json channels_to_json(const ChannelRealization& ch) {
  return json{{"K", ch.truth.K},
              {"H", grid_to_json(ch.truth.H)},
              {"Hest", grid_to_json(ch.estimate.H)},
              {"D", grid_to_json(ch.shaping)}};
}

ChannelRealization channels_from_json(const json& j) {
  if (!j.is_object() || !j.contains("K") || !j.contains("H")) {
    throw ConfigError("channel document needs 'K' and 'H'");
  }
  ChannelRealization ch;
  const int K = j.at("K").get<int>();
  if (K < 1) throw ConfigError("channel document needs K >= 1");
  ch.truth.K = K;
  grid_from_json(j.at("H"), ch.truth.H, K, "H");
  if (j.contains("Hest")) {
    ch.estimate.K = K;
    grid_from_json(j.at("Hest"), ch.estimate.H, K, "Hest");
  } else {
    ch.estimate = ch.truth;
  }
  if (j.contains("D")) {
    grid_from_json(j.at("D"), ch.shaping, K, "D");
  } else {
    for (int i = 0; i < kDirections; ++i)
      for (int jj = 0; jj < kDirections; ++jj) {
        const auto m = ch.truth.at(i, jj, 0).rows();
        ch.shaping[i][jj].assign(static_cast<std::size_t>(K), Mat::Identity(m, m));
      }
  }
  return ch;
}

}  // namespace fdmimo
