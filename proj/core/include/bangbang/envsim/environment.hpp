#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bangbang/envsim/reward.hpp"
#include "bangbang/random.hpp"

namespace bangbang::envsim {

enum class EnvId { kPendulum, kCartpole, kPointmass };

std::string_view to_string(EnvId id);
EnvId parse_env_id(std::string_view s);

// Physical state. Angles are wrapped to [-pi, pi); t counts decisions within
// the current episode.
struct EnvState {
  EnvId env_id = EnvId::kPendulum;
  std::vector<double> q;
  std::vector<double> qdot;
  int t = 0;
  std::vector<double> prev_action;
};

struct StepInfo {
  double dense_reward = 0.0;  // state reward before sparsification
  double state_reward = 0.0;  // after sparsification
  double penalty = 0.0;       // action cost that was subtracted
};

struct StepResult {
  std::vector<double> next_obs;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

double wrap_angle(double theta);

// A deterministic discrete-time environment. Reset randomness comes from the
// environment's own stream, so (seed, config, action sequence) fixes the run.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual EnvId id() const = 0;
  virtual const ActionSpec& action_spec() const = 0;
  virtual int observation_dim() const = 0;
  virtual std::vector<std::string> observation_names() const = 0;
  // Decisions per episode.
  virtual int episode_length() const = 0;
  // Seconds between two decisions.
  virtual double decision_interval() const = 0;

  virtual std::vector<double> reset() = 0;
  // `action` must satisfy |a_i| <= a_max_i.
  virtual StepResult step(std::span<const double> action) = 0;
  virtual const EnvState& state() const = 0;

  virtual std::unique_ptr<Environment> clone() const = 0;
};

// Shared machinery for the simulated systems: bounds checking, reward
// composition, episode bookkeeping and the reset stream.
class SimulatedEnvironment : public Environment {
 public:
  SimulatedEnvironment(EnvId id, ActionSpec spec, RewardSpec reward,
                       int episode_length, double dt, std::uint64_t seed,
                       bool observe_prev_action);

  EnvId id() const override { return state_.env_id; }
  const ActionSpec& action_spec() const override { return spec_; }
  int observation_dim() const override;
  std::vector<std::string> observation_names() const override;
  int episode_length() const override { return episode_length_; }
  double decision_interval() const override { return dt_; }
  const EnvState& state() const override { return state_; }
  const RewardSpec& reward_spec() const { return reward_; }

  std::vector<double> reset() override;
  StepResult step(std::span<const double> action) override;

  // Install an explicit physical state (tests, oracles).
  void set_state(const EnvState& state);
  std::vector<double> observe() const;

 protected:
  virtual void sample_initial_state(Rng& rng, EnvState& state) const = 0;
  virtual void integrate(EnvState& state, std::span<const double> action) const = 0;
  virtual double dense_reward(const EnvState& state) const = 0;
  virtual std::vector<double> physical_observation(const EnvState& state) const = 0;
  virtual std::vector<std::string> physical_observation_names() const = 0;
  // Continuing tasks never report done; the counter just wraps.
  virtual bool continuing() const { return false; }

  EnvState state_;

 private:
  ActionSpec spec_;
  RewardSpec reward_;
  int episode_length_;
  double dt_;
  bool observe_prev_action_;
  Rng rng_;
};

}  // namespace bangbang::envsim
