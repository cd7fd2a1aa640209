#include "bangbang/envsim/factory.hpp"

#include "bangbang/csv.hpp"
#include "bangbang/error.hpp"

namespace bangbang::envsim {
namespace {

int default_episode_length(EnvId id) {
  switch (id) {
    case EnvId::kPendulum: return PendulumParams{}.episode_length;
    case EnvId::kCartpole: return CartpoleParams{}.episode_length;
    case EnvId::kPointmass: return PointmassParams{}.episode_length;
  }
  return 1000;
}

}  // namespace

void EnvConfig::validate() const {
  reward.validate();
  if (episode_length < 0) throw ConfigError("episode_length must be >= 0");
  if (control_downsample < 1) throw ConfigError("control_downsample must be >= 1");
  if (resolved_episode_length() % control_downsample != 0) {
    throw ConfigError("control_downsample must divide episode_length");
  }
}

int EnvConfig::resolved_episode_length() const {
  return episode_length > 0 ? episode_length : default_episode_length(env_id);
}

EnvConfig EnvConfig::from_config(const Config& cfg) {
  EnvConfig out;
  out.env_id = parse_env_id(cfg.get_string("env.env_id", "pendulum"));
  out.episode_length = static_cast<int>(cfg.get_int("env.episode_length", 0));
  out.control_downsample = static_cast<int>(cfg.get_int("env.control_downsample", 1));
  out.seed = static_cast<std::uint64_t>(cfg.get_int("env.seed", 0));
  out.pointmass_task = parse_pointmass_task(cfg.get_string("env.task", "reset"));
  std::string start = cfg.get_string("env.start", "hanging");
  if (start == "hanging") {
    out.pendulum_start = PendulumStart::kHanging;
  } else if (start == "uniform") {
    out.pendulum_start = PendulumStart::kUniform;
  } else {
    throw ConfigError("env.start must be hanging|uniform");
  }
  out.observe_prev_action = cfg.get_bool("env.observe_prev_action", false);
  out.reward.structure = parse_cost_structure(cfg.get_string("reward.structure", "MS"));
  out.reward.penalty_weight = cfg.get_double("reward.penalty_weight", 0.0);
  if (auto th = cfg.find("reward.sparse_threshold"); th && *th != "none") {
    out.reward.sparse_threshold = cfg.get_double("reward.sparse_threshold", 0.0);
  }
  out.validate();
  return out;
}

void EnvConfig::to_config(Config& cfg) const {
  cfg.set("env.env_id", std::string(to_string(env_id)));
  cfg.set("env.episode_length", std::to_string(resolved_episode_length()));
  cfg.set("env.control_downsample", std::to_string(control_downsample));
  cfg.set("env.seed", std::to_string(seed));
  cfg.set("env.task", std::string(to_string(pointmass_task)));
  cfg.set("env.start", pendulum_start == PendulumStart::kHanging ? "hanging" : "uniform");
  cfg.set("env.observe_prev_action", observe_prev_action ? "true" : "false");
  cfg.set("reward.structure", std::string(to_string(reward.structure)));
  cfg.set("reward.penalty_weight", format_double(reward.penalty_weight));
  cfg.set("reward.sparse_threshold",
          reward.sparse_threshold ? format_double(*reward.sparse_threshold) : "none");
}

std::vector<std::string> EnvConfig::config_keys() {
  return {"env.env_id",         "env.episode_length", "env.control_downsample",
          "env.seed",           "env.task",           "env.start",
          "env.observe_prev_action", "reward.structure", "reward.penalty_weight",
          "reward.sparse_threshold"};
}

std::string EnvConfig::hash_hex() const {
  Config c;
  to_config(c);
  return c.content_hash_hex();
}

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg) {
  return make_environment(cfg, cfg.seed);
}

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::unique_ptr<Environment> env;
  const int length = cfg.resolved_episode_length();
  switch (cfg.env_id) {
    case EnvId::kPendulum: {
      PendulumParams p;
      p.episode_length = length;
      p.start = cfg.pendulum_start;
      env = std::make_unique<PendulumEnv>(p, cfg.reward, seed, cfg.observe_prev_action);
      break;
    }
    case EnvId::kCartpole: {
      CartpoleParams p;
      p.episode_length = length;
      env = std::make_unique<CartpoleEnv>(p, cfg.reward, seed, cfg.observe_prev_action);
      break;
    }
    case EnvId::kPointmass: {
      PointmassParams p;
      p.episode_length = length;
      p.task = cfg.pointmass_task;
      env = std::make_unique<PointmassEnv>(p, cfg.reward, seed, cfg.observe_prev_action);
      break;
    }
  }
  return downsample_control(std::move(env), cfg.control_downsample);
}

}  // namespace bangbang::envsim
