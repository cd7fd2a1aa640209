#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bangbang {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

// Named-stream seed splitting: every consumer of randomness (env resets,
// policy init, disturbances, evaluation) draws from its own stream derived
// from one master seed, so changing one component leaves the others intact.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                          std::uint64_t index = 0);
Rng make_rng(std::uint64_t master, std::string_view stream,
             std::uint64_t index = 0);

double standard_normal(Rng& rng);
double uniform(Rng& rng, double lo, double hi);

}  // namespace bangbang
