#include "bangbang/envsim/pendulum.hpp"

#include <cmath>
#include <numbers>

#include "bangbang/error.hpp"

namespace bangbang::envsim {

double pendulum_acceleration(const PendulumParams& p, double theta, double theta_dot,
                             double torque) {
  const double inertia = p.mass * p.length * p.length;
  return (p.mass * p.gravity * p.length * std::sin(theta) - p.damping * theta_dot + torque) /
         inertia;
}

double pendulum_state_reward(double theta) { return 0.5 * (1.0 + std::cos(theta)); }

double pendulum_energy(const PendulumParams& p, double theta, double theta_dot) {
  const double inertia = p.mass * p.length * p.length;
  return 0.5 * inertia * theta_dot * theta_dot +
         p.mass * p.gravity * p.length * (1.0 + std::cos(theta));
}

namespace {

void advance(const PendulumParams& p, EnvState& s, double torque) {
  const double h = p.dt / p.substeps;
  double theta = s.q[0];
  double theta_dot = s.qdot[0];
  for (int i = 0; i < p.substeps; ++i) {
    theta_dot += h * pendulum_acceleration(p, theta, theta_dot, torque);
    theta += h * theta_dot;
  }
  s.q[0] = wrap_angle(theta);
  s.qdot[0] = theta_dot;
}

ActionSpec pendulum_spec(const PendulumParams& p) { return ActionSpec::uniform(1, p.a_max); }

}  // namespace

StepResult pendulum_step(EnvState& state, std::span<const double> action,
                         const PendulumParams& params, const RewardSpec& reward) {
  if (action.size() != 1) throw ShapeError("pendulum action is a scalar torque");
  if (!std::isfinite(action[0]) || !std::isfinite(state.q.at(0)) ||
      !std::isfinite(state.qdot.at(0))) {
    throw NumericError("non-finite pendulum state or action");
  }
  if (std::abs(action[0]) > params.a_max + 1e-9) throw Error("torque exceeds a_max");
  advance(params, state, action[0]);
  if (!std::isfinite(state.q[0]) || !std::isfinite(state.qdot[0])) {
    throw NumericError("pendulum integration diverged");
  }
  StepResult out;
  const double normalized = action[0] / params.a_max;
  out.info.dense_reward = pendulum_state_reward(state.q[0]);
  out.info.state_reward = reward.sparse_threshold
                              ? sparsify_reward(out.info.dense_reward, *reward.sparse_threshold)
                              : out.info.dense_reward;
  out.info.penalty = reward.action_cost(std::span<const double>(&normalized, 1));
  out.reward = compose_reward(out.info.dense_reward, std::span<const double>(&normalized, 1), reward);
  state.prev_action.assign(1, action[0]);
  state.t += 1;
  out.done = state.t >= params.episode_length;
  out.next_obs = {std::cos(state.q[0]), std::sin(state.q[0]), state.qdot[0]};
  return out;
}

PendulumEnv::PendulumEnv(PendulumParams params, RewardSpec reward, std::uint64_t seed,
                         bool observe_prev_action)
    : SimulatedEnvironment(EnvId::kPendulum, pendulum_spec(params), reward,
                           params.episode_length, params.dt, seed, observe_prev_action),
      params_(params) {
  if (params_.substeps < 1) throw ConfigError("pendulum substeps must be >= 1");
  state_.q = {std::numbers::pi};
  state_.q[0] = wrap_angle(state_.q[0]);
  state_.qdot = {0.0};
}

std::unique_ptr<Environment> PendulumEnv::clone() const {
  return std::make_unique<PendulumEnv>(*this);
}

void PendulumEnv::sample_initial_state(Rng& rng, EnvState& state) const {
  if (params_.start == PendulumStart::kUniform) {
    state.q = {uniform(rng, -std::numbers::pi, std::numbers::pi)};
    state.qdot = {uniform(rng, -1.0, 1.0)};
  } else {
    state.q = {wrap_angle(std::numbers::pi + uniform(rng, -0.1, 0.1))};
    state.qdot = {uniform(rng, -0.1, 0.1)};
  }
}

void PendulumEnv::integrate(EnvState& state, std::span<const double> action) const {
  advance(params_, state, action[0]);
}

double PendulumEnv::dense_reward(const EnvState& state) const {
  return pendulum_state_reward(state.q[0]);
}

std::vector<double> PendulumEnv::physical_observation(const EnvState& state) const {
  return {std::cos(state.q[0]), std::sin(state.q[0]), state.qdot[0]};
}

std::vector<std::string> PendulumEnv::physical_observation_names() const {
  return {"cos_theta", "sin_theta", "theta_dot"};
}

}  // namespace bangbang::envsim
