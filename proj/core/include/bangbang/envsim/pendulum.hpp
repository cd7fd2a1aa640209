#pragma once

#include "bangbang/envsim/environment.hpp"

namespace bangbang::envsim {

enum class PendulumStart { kHanging, kUniform };

// Torque-limited pendulum, theta = 0 upright:
//   m l^2 theta'' = m g l sin(theta) - b theta' + u
struct PendulumParams {
  double mass = 1.0;
  double length = 1.0;
  double gravity = 9.81;
  double damping = 0.05;
  double a_max = 2.0;
  double dt = 0.05;
  int substeps = 25;
  int episode_length = 200;
  PendulumStart start = PendulumStart::kHanging;
};

double pendulum_acceleration(const PendulumParams& p, double theta, double theta_dot,
                             double torque);
// (1 + cos theta) / 2
double pendulum_state_reward(double theta);
// Mechanical energy measured from the hanging rest position.
double pendulum_energy(const PendulumParams& p, double theta, double theta_dot);

// One decision step of semi-implicit Euler with `substeps` inner steps.
// Advances `state` in place and returns the composed reward.
StepResult pendulum_step(EnvState& state, std::span<const double> action,
                         const PendulumParams& params, const RewardSpec& reward);

class PendulumEnv final : public SimulatedEnvironment {
 public:
  PendulumEnv(PendulumParams params, RewardSpec reward, std::uint64_t seed,
              bool observe_prev_action = false);

  const PendulumParams& params() const { return params_; }
  std::unique_ptr<Environment> clone() const override;

 protected:
  void sample_initial_state(Rng& rng, EnvState& state) const override;
  void integrate(EnvState& state, std::span<const double> action) const override;
  double dense_reward(const EnvState& state) const override;
  std::vector<double> physical_observation(const EnvState& state) const override;
  std::vector<std::string> physical_observation_names() const override;

 private:
  PendulumParams params_;
};

}  // namespace bangbang::envsim
