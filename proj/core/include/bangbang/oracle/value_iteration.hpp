#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "bangbang/envsim/pendulum.hpp"
#include "bangbang/envsim/reward.hpp"

namespace bangbang::oracle {

// Deterministic finite MDP whose successor value is a convex combination of
// up to four grid values (bilinear interpolation).
struct GridMdp {
  int num_states = 0;
  std::vector<double> actions;  // action values, shared by every state
  std::vector<double> reward;   // num_states x num_actions, row-major
  std::vector<std::array<std::int32_t, 4>> next_index;  // per (s, a)
  std::vector<std::array<double, 4>> next_weight;       // per (s, a), sums to 1
  double gamma = 0.99;

  int num_actions() const { return static_cast<int>(actions.size()); }
  void validate() const;
};

struct PendulumGridSpec {
  int n_theta = 201;  // periodic over [-pi, pi)
  int n_theta_dot = 201;  // inclusive over [-theta_dot_max, theta_dot_max]
  double theta_dot_max = 8.0;
  int n_actions = 21;  // evenly spaced over [-a_max, a_max]
  double gamma = 0.99;
  envsim::RewardSpec reward;
  envsim::PendulumParams params;

  void validate() const;
  double theta(int i) const;
  double theta_dot(int j) const;
  // State index of grid point (i, j).
  int index(int i, int j) const { return j * n_theta + i; }
};

// One decision step of the production dynamics from every grid point;
// successors are clamped to the velocity range and interpolated.
GridMdp build_pendulum_mdp(const PendulumGridSpec& spec);

struct ViResult {
  std::vector<double> value;
  std::vector<int> policy;             // greedy action index per state
  std::vector<std::uint8_t> singular;  // greedy maximizer not unique
  std::vector<double> residuals;       // sup-norm Bellman residual per sweep
  int iterations = 0;
};

inline constexpr double kTieSlack = 1e-9;

// Jacobi sweeps with separate read/write buffers until the sup-norm residual
// is <= tol. Greedy ties (within kTieSlack) resolve to the smallest |a| and
// are flagged as singular. Throws ConvergenceError after max_iters sweeps.
ViResult value_iteration(const GridMdp& mdp, double tol = 1e-6, int max_iters = 10000);

// Fraction of states with |a| = a_max among those not flagged singular
// (all states when `singular` is empty).
double saturation_fraction(const std::vector<double>& actions, double a_max,
                           const std::vector<std::uint8_t>& singular = {});
// Convenience over a VI result.
double saturation_fraction(const GridMdp& mdp, const ViResult& vi, double a_max);

struct GridMetadata {
  std::string cost;
  double penalty_weight = 0.0;
  double gamma = 0.0;
  double tol = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double saturation = 0.0;
};

// "# key=value" metadata lines, then theta,theta_dot,action,value,singular.
void write_grid_csv(std::ostream& out, const PendulumGridSpec& spec, const GridMdp& mdp,
                    const ViResult& vi, const GridMetadata& meta);

}  // namespace bangbang::oracle
