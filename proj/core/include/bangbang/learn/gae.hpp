#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bangbang::learn {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

// delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t), with V(s_T) =
// bootstrap; A_t = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma,
                      double lambda);

// Time-limit variant: episode ends are truncations, not terminal states.
// delta_t = r_t + gamma * next_values_t - V(s_t), and the advantage recursion
// is cut at every done flag.
GaeResult compute_gae_truncated(std::span<const double> rewards, std::span<const double> values,
                                std::span<const double> next_values,
                                std::span<const std::uint8_t> dones, double gamma, double lambda);

// In-place (x - mean) / std; leaves a constant vector at zero.
void normalize(std::vector<double>& x);

}  // namespace bangbang::learn
