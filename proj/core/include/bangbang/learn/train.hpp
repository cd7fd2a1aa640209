#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "bangbang/config.hpp"
#include "bangbang/envsim/factory.hpp"
#include "bangbang/learn/checkpoint.hpp"
#include "bangbang/learn/ppo.hpp"

namespace bangbang::learn {

struct TrainConfig {
  envsim::EnvConfig env;
  PolicyConfig policy;
  PPOConfig ppo;
  long long budget = 200000;        // environment decisions
  long long eval_interval = 10000;  // decisions between evaluations
  int eval_episodes = 10;
  std::uint64_t seed = 0;

  void validate() const;
  // [env], [reward], [policy], [trainer]; seed comes from the caller.
  static TrainConfig from_config(const Config& cfg);
  void to_config(Config& cfg) const;
  static std::vector<std::string> config_keys();
};

struct CurvePoint {
  long long env_steps = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double mean_kl = 0.0;
  double clip_frac = 0.0;
  double entropy = 0.0;
};

struct EvalResult {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> returns;
};

// Deterministic-action returns over `episodes` environments seeded from the
// ("eval", k) streams of `seed`.
EvalResult evaluate(const Policy& policy, const envsim::EnvConfig& env, int episodes,
                    std::uint64_t seed);

struct TrainHooks {
  // Called after every rollout, before the update.
  std::function<void(const std::vector<Trajectory>&)> on_rollout;
  std::function<void(const CurvePoint&)> on_eval;
};

struct TrainResult {
  PolicyCheckpoint checkpoint;
  std::vector<CurvePoint> curve;
  long long env_steps = 0;
};

TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks = {});

// env_steps, mean_return, std_return, mean_kl, clip_frac, entropy
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);
std::vector<CurvePoint> read_curve_csv(std::istream& in);

}  // namespace bangbang::learn
