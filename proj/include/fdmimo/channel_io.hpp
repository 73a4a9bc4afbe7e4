#pragma once

#include "json.hpp"

#include "fdmimo/channel.hpp"

namespace fdmimo {

/// Matrices are arrays of rows; each entry is an [re, im] pair.
nlohmann::json matrix_to_json(const Mat& m);
Mat matrix_from_json(const nlohmann::json& j);

/// {"K": K, "H": [i][j][k] matrices, "Hest": ..., "D": ...}
nlohmann::json channels_to_json(const ChannelRealization& channels);
ChannelRealization channels_from_json(const nlohmann::json& j);

}  // namespace fdmimo
