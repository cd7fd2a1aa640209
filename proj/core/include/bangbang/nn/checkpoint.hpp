#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bangbang/nn/adam.hpp"
#include "bangbang/nn/mlp.hpp"

namespace bangbang::nn {

inline constexpr int kCheckpointVersion = 1;

// Portable description of one network plus its optimizer state.
struct NetworkSnapshot {
  std::vector<int> layer_sizes;
  Activation activation = Activation::kTanh;
  // One row-major array per parameter tensor: W0, b0, W1, b1, ...
  std::vector<std::vector<double>> tensors;
  AdamMoments optimizer;
};

NetworkSnapshot snapshot(const Mlp& mlp, const Adam* optimizer = nullptr);
Mlp restore(const NetworkSnapshot& snap);

// {"version", "layer_sizes", "activation", "weights", "optimizer"}
std::string network_to_json(const NetworkSnapshot& snap);
NetworkSnapshot network_from_json(std::string_view text);

}  // namespace bangbang::nn
