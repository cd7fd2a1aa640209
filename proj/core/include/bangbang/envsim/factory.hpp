#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bangbang/config.hpp"
#include "bangbang/envsim/cartpole.hpp"
#include "bangbang/envsim/downsample.hpp"
#include "bangbang/envsim/pendulum.hpp"
#include "bangbang/envsim/pointmass.hpp"

namespace bangbang::envsim {

struct EnvConfig {
  EnvId env_id = EnvId::kPendulum;
  RewardSpec reward;
  int episode_length = 0;  // inner simulation steps; 0 selects the env default
  int control_downsample = 1;
  std::uint64_t seed = 0;
  PointmassTask pointmass_task = PointmassTask::kReset;
  PendulumStart pendulum_start = PendulumStart::kHanging;
  bool observe_prev_action = false;

  void validate() const;
  int resolved_episode_length() const;

  // Keys under [env] and [reward].
  static EnvConfig from_config(const Config& cfg);
  void to_config(Config& cfg) const;
  static std::vector<std::string> config_keys();
  std::string hash_hex() const;
};

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg);
// Same configuration with the reset stream seeded by `seed`.
std::unique_ptr<Environment> make_environment(const EnvConfig& cfg, std::uint64_t seed);

}  // namespace bangbang::envsim
