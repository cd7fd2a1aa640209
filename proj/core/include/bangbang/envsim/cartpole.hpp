#pragma once

#include <array>

#include "bangbang/envsim/environment.hpp"

namespace bangbang::envsim {

// Frictionless cart-pole; q = (x, theta), theta = 0 upright, pole_length is
// the distance from the pivot to the pole's center of mass.
struct CartpoleParams {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_length = 0.5;
  double gravity = 9.81;
  double force_max = 10.0;
  double rail = 2.0;
  double dt = 0.02;
  int substeps = 10;
  int episode_length = 1000;
};

struct CartpoleAccel {
  double x_ddot;
  double theta_ddot;
};

CartpoleAccel cartpole_acceleration(const CartpoleParams& p, double theta, double x_dot,
                                    double theta_dot, double force);
// clip(1 - |x| / rail, 0, 1)
double cartpole_displacement_weight(const CartpoleParams& p, double x);
double cartpole_state_reward(const CartpoleParams& p, double x, double theta);

StepResult cartpole_step(EnvState& state, std::span<const double> action,
                         const CartpoleParams& params, const RewardSpec& reward);

class CartpoleEnv final : public SimulatedEnvironment {
 public:
  CartpoleEnv(CartpoleParams params, RewardSpec reward, std::uint64_t seed,
              bool observe_prev_action = false);

  const CartpoleParams& params() const { return params_; }
  std::unique_ptr<Environment> clone() const override;

 protected:
  void sample_initial_state(Rng& rng, EnvState& state) const override;
  void integrate(EnvState& state, std::span<const double> action) const override;
  double dense_reward(const EnvState& state) const override;
  std::vector<double> physical_observation(const EnvState& state) const override;
  std::vector<std::string> physical_observation_names() const override;

 private:
  CartpoleParams params_;
};

}  // namespace bangbang::envsim
