#include "bangbang/envsim/pointmass.hpp"

#include <cmath>

#include "bangbang/error.hpp"

namespace bangbang::envsim {

std::string_view to_string(PointmassTask t) {
  return t == PointmassTask::kReset ? "reset" : "continuing";
}

PointmassTask parse_pointmass_task(std::string_view s) {
  if (s == "reset") return PointmassTask::kReset;
  if (s == "continuing") return PointmassTask::kContinuing;
  throw ConfigError("unknown pointmass task '" + std::string(s) + "' (reset|continuing)");
}

std::vector<RewardCircle> default_reward_circles() {
  return {{0.6, 0.6, 0.1, 0.25},
          {-0.6, 0.6, 0.1, 0.5},
          {-0.6, -0.6, 0.1, 0.75},
          {0.6, -0.6, 0.1, 1.0}};
}

AxisState pointmass_axis_flow(const PointmassParams& p, AxisState s, double force,
                              double duration) {
  if (p.damping == 0.0) {
    const double acc = force / p.mass;
    return {s.position + s.velocity * duration + 0.5 * acc * duration * duration,
            s.velocity + acc * duration};
  }
  const double k = p.damping / p.mass;
  const double v_terminal = force / p.damping;
  const double decay = std::exp(-k * duration);
  // -expm1 keeps (1 - e^{-kt}) accurate for small kt
  const double one_minus = -std::expm1(-k * duration);
  return {s.position + v_terminal * duration + (s.velocity - v_terminal) * one_minus / k,
          v_terminal + (s.velocity - v_terminal) * decay};
}

double pointmass_state_reward(const PointmassParams& p, double x, double y) {
  if (p.task == PointmassTask::kReset) return 0.0;
  for (const auto& c : p.circles) {
    const double dx = x - c.x;
    const double dy = y - c.y;
    if (dx * dx + dy * dy <= c.radius * c.radius) return c.value;
  }
  return 0.0;
}

namespace {

void advance(const PointmassParams& p, EnvState& s, std::span<const double> action) {
  for (int axis = 0; axis < 2; ++axis) {
    auto next = pointmass_axis_flow(p, {s.q[axis], s.qdot[axis]}, action[axis], p.dt);
    if (next.position > p.arena) {
      next.position = p.arena;
      next.velocity = 0.0;
    } else if (next.position < -p.arena) {
      next.position = -p.arena;
      next.velocity = 0.0;
    }
    s.q[axis] = next.position;
    s.qdot[axis] = next.velocity;
  }
}

}  // namespace

StepResult pointmass_step(EnvState& state, std::span<const double> action,
                          const PointmassParams& params, const RewardSpec& reward) {
  if (action.size() != 2) throw ShapeError("pointmass action is a 2-vector");
  if (state.q.size() != 2 || state.qdot.size() != 2) throw ShapeError("pointmass state is (x, y)");
  for (double a : action) {
    if (!std::isfinite(a)) throw NumericError("non-finite pointmass action");
    if (std::abs(a) > params.a_max + 1e-9) throw Error("pointmass force exceeds a_max");
  }
  advance(params, state, action);
  StepResult out;
  const double normalized[2] = {action[0] / params.a_max, action[1] / params.a_max};
  out.info.dense_reward = pointmass_state_reward(params, state.q[0], state.q[1]);
  out.info.state_reward = reward.sparse_threshold
                              ? sparsify_reward(out.info.dense_reward, *reward.sparse_threshold)
                              : out.info.dense_reward;
  out.info.penalty = reward.action_cost(normalized);
  out.reward = compose_reward(out.info.dense_reward, normalized, reward);
  state.prev_action.assign(action.begin(), action.end());
  state.t += 1;
  if (state.t >= params.episode_length) {
    if (params.task == PointmassTask::kContinuing) {
      state.t = 0;
    } else {
      out.done = true;
    }
  }
  out.next_obs = {state.q[0], state.q[1], state.qdot[0], state.qdot[1]};
  return out;
}

PointmassEnv::PointmassEnv(PointmassParams params, RewardSpec reward, std::uint64_t seed,
                           bool observe_prev_action)
    : SimulatedEnvironment(EnvId::kPointmass, ActionSpec::uniform(2, params.a_max), reward,
                           params.episode_length, params.dt, seed, observe_prev_action),
      params_(std::move(params)) {
  if (!(params_.mass > 0.0) || params_.damping < 0.0 || !(params_.arena > 0.0)) {
    throw ConfigError("invalid pointmass parameters");
  }
  state_.q = {0.0, 0.0};
  state_.qdot = {0.0, 0.0};
}

std::unique_ptr<Environment> PointmassEnv::clone() const {
  return std::make_unique<PointmassEnv>(*this);
}

void PointmassEnv::sample_initial_state(Rng& rng, EnvState& state) const {
  (void)rng;
  state.q = {0.0, 0.0};
  state.qdot = {0.0, 0.0};
}

void PointmassEnv::integrate(EnvState& state, std::span<const double> action) const {
  advance(params_, state, action);
}

double PointmassEnv::dense_reward(const EnvState& state) const {
  return pointmass_state_reward(params_, state.q[0], state.q[1]);
}

std::vector<double> PointmassEnv::physical_observation(const EnvState& state) const {
  return {state.q[0], state.q[1], state.qdot[0], state.qdot[1]};
}

std::vector<std::string> PointmassEnv::physical_observation_names() const {
  return {"x", "y", "vx", "vy"};
}

}  // namespace bangbang::envsim
