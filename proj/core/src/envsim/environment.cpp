#include "bangbang/envsim/environment.hpp"

#include <cmath>
#include <numbers>

#include "bangbang/error.hpp"

namespace bangbang::envsim {

std::string_view to_string(EnvId id) {
  switch (id) {
    case EnvId::kPendulum: return "pendulum";
    case EnvId::kCartpole: return "cartpole";
    case EnvId::kPointmass: return "pointmass";
  }
  return "?";
}

EnvId parse_env_id(std::string_view s) {
  if (s == "pendulum") return EnvId::kPendulum;
  if (s == "cartpole") return EnvId::kCartpole;
  if (s == "pointmass") return EnvId::kPointmass;
  throw ConfigError("unknown env_id '" + std::string(s) + "' (pendulum|cartpole|pointmass)");
}

double wrap_angle(double theta) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double w = std::fmod(theta + std::numbers::pi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  w -= std::numbers::pi;
  // fmod rounding can land exactly on +pi
  if (w >= std::numbers::pi) w -= kTwoPi;
  return w;
}

SimulatedEnvironment::SimulatedEnvironment(EnvId id, ActionSpec spec, RewardSpec reward,
                                           int episode_length, double dt,
                                           std::uint64_t seed, bool observe_prev_action)
    : spec_(std::move(spec)),
      reward_(reward),
      episode_length_(episode_length),
      dt_(dt),
      observe_prev_action_(observe_prev_action),
      rng_(seed) {
  spec_.validate();
  reward_.validate();
  if (episode_length_ < 1) throw ConfigError("episode_length must be >= 1");
  if (!(dt_ > 0.0)) throw ConfigError("dt must be positive");
  state_.env_id = id;
  state_.prev_action.assign(static_cast<std::size_t>(spec_.dim), 0.0);
}

int SimulatedEnvironment::observation_dim() const {
  return static_cast<int>(physical_observation_names().size()) +
         (observe_prev_action_ ? spec_.dim : 0);
}

std::vector<std::string> SimulatedEnvironment::observation_names() const {
  auto names = physical_observation_names();
  if (observe_prev_action_) {
    for (int i = 0; i < spec_.dim; ++i) names.push_back("prev_a" + std::to_string(i));
  }
  return names;
}

std::vector<double> SimulatedEnvironment::observe() const {
  auto obs = physical_observation(state_);
  if (observe_prev_action_) {
    obs.insert(obs.end(), state_.prev_action.begin(), state_.prev_action.end());
  }
  return obs;
}

std::vector<double> SimulatedEnvironment::reset() {
  sample_initial_state(rng_, state_);
  state_.t = 0;
  state_.prev_action.assign(static_cast<std::size_t>(spec_.dim), 0.0);
  return observe();
}

void SimulatedEnvironment::set_state(const EnvState& state) {
  if (state.env_id != state_.env_id) throw ConfigError("state belongs to a different environment");
  state_ = state;
  if (state_.prev_action.size() != static_cast<std::size_t>(spec_.dim)) {
    state_.prev_action.assign(static_cast<std::size_t>(spec_.dim), 0.0);
  }
}

StepResult SimulatedEnvironment::step(std::span<const double> action) {
  if (action.size() != static_cast<std::size_t>(spec_.dim)) {
    throw ShapeError("action has dimension " + std::to_string(action.size()) + ", expected " +
                     std::to_string(spec_.dim));
  }
  for (double a : action) {
    if (!std::isfinite(a)) throw NumericError("non-finite action");
  }
  // tolerate round-off from bijectors
  if (!spec_.contains(action, 1e-9)) throw Error("action outside the action bounds");
  auto applied = spec_.clip(action);

  integrate(state_, applied);
  for (double v : state_.q) {
    if (!std::isfinite(v)) throw NumericError("integration produced a non-finite state");
  }
  for (double v : state_.qdot) {
    if (!std::isfinite(v)) throw NumericError("integration produced a non-finite state");
  }

  StepResult out;
  auto normalized = spec_.normalize(applied);
  out.info.dense_reward = dense_reward(state_);
  out.info.state_reward = reward_.sparse_threshold
                              ? sparsify_reward(out.info.dense_reward, *reward_.sparse_threshold)
                              : out.info.dense_reward;
  out.info.penalty = reward_.action_cost(normalized);
  out.reward = compose_reward(out.info.dense_reward, normalized, reward_);

  state_.prev_action = std::move(applied);
  state_.t += 1;
  if (state_.t >= episode_length_) {
    if (continuing()) {
      state_.t = 0;
    } else {
      out.done = true;
    }
  }
  out.next_obs = observe();
  return out;
}

}  // namespace bangbang::envsim
