#pragma once

#include "bangbang/nn/checkpoint.hpp"
#include "json.hpp"

namespace bangbang::nn {

nlohmann::json network_json(const NetworkSnapshot& snap);
NetworkSnapshot network_from(const nlohmann::json& j);

}  // namespace bangbang::nn
