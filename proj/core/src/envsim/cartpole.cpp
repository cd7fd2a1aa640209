#include "bangbang/envsim/cartpole.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bangbang/error.hpp"

namespace bangbang::envsim {

CartpoleAccel cartpole_acceleration(const CartpoleParams& p, double theta, double x_dot,
                                    double theta_dot, double force) {
  (void)x_dot;
  const double total = p.cart_mass + p.pole_mass;
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double tmp = (force + p.pole_mass * p.pole_length * theta_dot * theta_dot * s) / total;
  const double theta_ddot = (p.gravity * s - c * tmp) /
                            (p.pole_length * (4.0 / 3.0 - p.pole_mass * c * c / total));
  const double x_ddot = tmp - p.pole_mass * p.pole_length * theta_ddot * c / total;
  return {x_ddot, theta_ddot};
}

double cartpole_displacement_weight(const CartpoleParams& p, double x) {
  return std::clamp(1.0 - std::abs(x) / p.rail, 0.0, 1.0);
}

double cartpole_state_reward(const CartpoleParams& p, double x, double theta) {
  return 0.5 * (1.0 + std::cos(theta)) * cartpole_displacement_weight(p, x);
}

namespace {

void advance(const CartpoleParams& p, EnvState& s, double force) {
  const double h = p.dt / p.substeps;
  double x = s.q[0], theta = s.q[1];
  double x_dot = s.qdot[0], theta_dot = s.qdot[1];
  for (int i = 0; i < p.substeps; ++i) {
    auto acc = cartpole_acceleration(p, theta, x_dot, theta_dot, force);
    x_dot += h * acc.x_ddot;
    theta_dot += h * acc.theta_ddot;
    x += h * x_dot;
    theta += h * theta_dot;
    if (x > p.rail) {
      x = p.rail;
      x_dot = 0.0;
    } else if (x < -p.rail) {
      x = -p.rail;
      x_dot = 0.0;
    }
  }
  s.q = {x, wrap_angle(theta)};
  s.qdot = {x_dot, theta_dot};
}

}  // namespace

StepResult cartpole_step(EnvState& state, std::span<const double> action,
                         const CartpoleParams& params, const RewardSpec& reward) {
  if (action.size() != 1) throw ShapeError("cart-pole action is a scalar force");
  if (state.q.size() != 2 || state.qdot.size() != 2) throw ShapeError("cart-pole state is (x, theta)");
  for (double v : {action[0], state.q[0], state.q[1], state.qdot[0], state.qdot[1]}) {
    if (!std::isfinite(v)) throw NumericError("non-finite cart-pole state or action");
  }
  if (std::abs(action[0]) > params.force_max + 1e-9) throw Error("force exceeds force_max");
  advance(params, state, action[0]);
  for (double v : {state.q[0], state.q[1], state.qdot[0], state.qdot[1]}) {
    if (!std::isfinite(v)) throw NumericError("cart-pole integration diverged");
  }
  StepResult out;
  const double normalized = action[0] / params.force_max;
  out.info.dense_reward = cartpole_state_reward(params, state.q[0], state.q[1]);
  out.info.state_reward = reward.sparse_threshold
                              ? sparsify_reward(out.info.dense_reward, *reward.sparse_threshold)
                              : out.info.dense_reward;
  out.info.penalty = reward.action_cost(std::span<const double>(&normalized, 1));
  out.reward = compose_reward(out.info.dense_reward, std::span<const double>(&normalized, 1), reward);
  state.prev_action.assign(1, action[0]);
  state.t += 1;
  out.done = state.t >= params.episode_length;
  out.next_obs = {state.q[0], state.qdot[0], std::cos(state.q[1]), std::sin(state.q[1]),
                  state.qdot[1]};
  return out;
}

CartpoleEnv::CartpoleEnv(CartpoleParams params, RewardSpec reward, std::uint64_t seed,
                         bool observe_prev_action)
    : SimulatedEnvironment(EnvId::kCartpole, ActionSpec::uniform(1, params.force_max), reward,
                           params.episode_length, params.dt, seed, observe_prev_action),
      params_(params) {
  if (params_.substeps < 1) throw ConfigError("cart-pole substeps must be >= 1");
  state_.q = {0.0, wrap_angle(std::numbers::pi)};
  state_.qdot = {0.0, 0.0};
}

std::unique_ptr<Environment> CartpoleEnv::clone() const {
  return std::make_unique<CartpoleEnv>(*this);
}

void CartpoleEnv::sample_initial_state(Rng& rng, EnvState& state) const {
  state.q = {uniform(rng, -0.1, 0.1), wrap_angle(std::numbers::pi + uniform(rng, -0.1, 0.1))};
  state.qdot = {uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05)};
}

void CartpoleEnv::integrate(EnvState& state, std::span<const double> action) const {
  advance(params_, state, action[0]);
}

double CartpoleEnv::dense_reward(const EnvState& state) const {
  return cartpole_state_reward(params_, state.q[0], state.q[1]);
}

std::vector<double> CartpoleEnv::physical_observation(const EnvState& state) const {
  return {state.q[0], state.qdot[0], std::cos(state.q[1]), std::sin(state.q[1]), state.qdot[1]};
}

std::vector<std::string> CartpoleEnv::physical_observation_names() const {
  return {"x", "x_dot", "cos_theta", "sin_theta", "theta_dot"};
}

}  // namespace bangbang::envsim
