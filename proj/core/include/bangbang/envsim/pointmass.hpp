#pragma once

#include <array>
#include <vector>

#include "bangbang/envsim/environment.hpp"

namespace bangbang::envsim {

// Task A resets from the center every episode and never pays state reward.
// Task B never resets and pays a circle's value while the agent is inside it.
enum class PointmassTask { kReset, kContinuing };

std::string_view to_string(PointmassTask t);
PointmassTask parse_pointmass_task(std::string_view s);

struct RewardCircle {
  double x;
  double y;
  double radius;
  double value;
};

// Counter-clockwise from the first quadrant: 0.25, 0.5, 0.75, 1.0.
std::vector<RewardCircle> default_reward_circles();

// Damped double integrator m v' = a - c v in the square [-arena, arena]^2.
struct PointmassParams {
  double mass = 1.0;
  double damping = 1.0;
  double arena = 1.0;
  double a_max = 1.0;
  double dt = 0.05;
  int episode_length = 1000;
  PointmassTask task = PointmassTask::kReset;
  std::vector<RewardCircle> circles = default_reward_circles();
};

// Exact zero-order-hold solution of one axis over `duration` seconds.
struct AxisState {
  double position;
  double velocity;
};
AxisState pointmass_axis_flow(const PointmassParams& p, AxisState s, double force,
                              double duration);

double pointmass_state_reward(const PointmassParams& p, double x, double y);

StepResult pointmass_step(EnvState& state, std::span<const double> action,
                          const PointmassParams& params, const RewardSpec& reward);

class PointmassEnv final : public SimulatedEnvironment {
 public:
  PointmassEnv(PointmassParams params, RewardSpec reward, std::uint64_t seed,
               bool observe_prev_action = false);

  const PointmassParams& params() const { return params_; }
  std::unique_ptr<Environment> clone() const override;

 protected:
  void sample_initial_state(Rng& rng, EnvState& state) const override;
  void integrate(EnvState& state, std::span<const double> action) const override;
  double dense_reward(const EnvState& state) const override;
  std::vector<double> physical_observation(const EnvState& state) const override;
  std::vector<std::string> physical_observation_names() const override;
  bool continuing() const override { return params_.task == PointmassTask::kContinuing; }

 private:
  PointmassParams params_;
};

}  // namespace bangbang::envsim
