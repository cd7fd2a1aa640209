#include "bangbang/learn/train.hpp"

#include <cmath>
#include <istream>
#include <numeric>

#include "bangbang/csv.hpp"
#include "bangbang/error.hpp"

namespace bangbang::learn {

void TrainConfig::validate() const {
  env.validate();
  policy.validate();
  ppo.validate();
  if (budget < 0) throw ConfigError("trainer.budget must be >= 0");
  if (eval_interval < 1) throw ConfigError("trainer.eval_interval must be >= 1");
  if (eval_episodes < 1) throw ConfigError("trainer.eval_episodes must be >= 1");
}

TrainConfig TrainConfig::from_config(const Config& cfg) {
  TrainConfig t;
  t.env = envsim::EnvConfig::from_config(cfg);
  t.policy = PolicyConfig::from_config(cfg);
  t.ppo = PPOConfig::from_config(cfg);
  t.budget = cfg.get_int("trainer.budget", t.budget);
  t.eval_interval = cfg.get_int("trainer.eval_interval", t.eval_interval);
  t.eval_episodes = static_cast<int>(cfg.get_int("trainer.eval_episodes", t.eval_episodes));
  t.validate();
  return t;
}

void TrainConfig::to_config(Config& cfg) const {
  env.to_config(cfg);
  policy.to_config(cfg);
  ppo.to_config(cfg);
  cfg.set("trainer.budget", std::to_string(budget));
  cfg.set("trainer.eval_interval", std::to_string(eval_interval));
  cfg.set("trainer.eval_episodes", std::to_string(eval_episodes));
}

std::vector<std::string> TrainConfig::config_keys() {
  std::vector<std::string> keys = envsim::EnvConfig::config_keys();
  for (auto& k : PolicyConfig::config_keys()) keys.push_back(k);
  for (auto& k : PPOConfig::config_keys()) keys.push_back(k);
  keys.insert(keys.end(), {"trainer.budget", "trainer.eval_interval", "trainer.eval_episodes"});
  return keys;
}

EvalResult evaluate(const Policy& policy, const envsim::EnvConfig& env, int episodes,
                    std::uint64_t seed) {
  EvalResult r;
  for (int k = 0; k < episodes; ++k) {
    auto e = envsim::make_environment(env, derive_seed(seed, "eval", k));
    r.returns.push_back(run_episode(policy, *e, true).total_return);
  }
  const double n = static_cast<double>(r.returns.size());
  r.mean = std::accumulate(r.returns.begin(), r.returns.end(), 0.0) / n;
  double var = 0.0;
  for (double x : r.returns) var += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(var / n);
  return r;
}

TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  auto probe = envsim::make_environment(cfg.env);
  const int obs_dim = probe->observation_dim();
  Rng policy_rng = make_rng(cfg.seed, "policy_init");
  Rng value_rng = make_rng(cfg.seed, "value_init");
  Policy policy(obs_dim, probe->action_spec(), cfg.policy, policy_rng);
  nn::Mlp value = make_value_net(obs_dim, cfg.policy, value_rng);
  PPOLearner learner(std::move(policy), std::move(value), cfg.ppo);

  TrainResult result;
  if (cfg.budget > 0) {
    EnvPool pool(cfg.env, cfg.ppo.num_envs, cfg.seed);
    Rng rollout_rng = make_rng(cfg.seed, "rollout");
    Rng update_rng = make_rng(cfg.seed, "minibatch");
    long long next_eval = cfg.eval_interval;
    while (pool.env_steps() < cfg.budget) {
      const long long remaining = cfg.budget - pool.env_steps();
      const int horizon = static_cast<int>(std::min<long long>(
          cfg.ppo.horizon, (remaining + cfg.ppo.num_envs - 1) / cfg.ppo.num_envs));
      auto trajs = collect_rollouts(learner.policy, &learner.value_fn, pool, horizon, rollout_rng);
      if (hooks.on_rollout) hooks.on_rollout(trajs);
      const PPOBatch batch = make_batch(trajs, cfg.ppo);
      const PPODiagnostics diag = ppo_update(learner, batch, cfg.ppo, update_rng);
      const bool last = pool.env_steps() >= cfg.budget;
      if (pool.env_steps() >= next_eval || last) {
        const EvalResult ev = evaluate(learner.policy, cfg.env, cfg.eval_episodes, cfg.seed);
        CurvePoint pt{pool.env_steps(), ev.mean, ev.std, diag.mean_kl, diag.clip_frac,
                      diag.entropy};
        result.curve.push_back(pt);
        if (hooks.on_eval) hooks.on_eval(pt);
        while (next_eval <= pool.env_steps()) next_eval += cfg.eval_interval;
      }
    }
    result.env_steps = pool.env_steps();
  }
  result.checkpoint.policy = std::move(learner.policy);
  result.checkpoint.value_fn = std::move(learner.value_fn);
  result.checkpoint.env = cfg.env;
  result.checkpoint.policy_optimizer = learner.policy_opt.moments();
  result.checkpoint.value_optimizer = learner.value_opt.moments();
  return result;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  CsvWriter w(out, {"env_steps", "mean_return", "std_return", "mean_kl", "clip_frac", "entropy"});
  for (const auto& p : curve) {
    w.cell(p.env_steps).cell(p.mean_return).cell(p.std_return).cell(p.mean_kl).cell(p.clip_frac)
        .cell(p.entropy);
    w.end_row();
  }
}

std::vector<CurvePoint> read_curve_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  std::vector<CurvePoint> out;
  const auto steps = t.numbers("env_steps");
  const auto mean = t.numbers("mean_return");
  const auto sd = t.numbers("std_return");
  const auto kl = t.numbers("mean_kl");
  const auto cf = t.numbers("clip_frac");
  const auto ent = t.numbers("entropy");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out.push_back({static_cast<long long>(steps[i]), mean[i], sd[i], kl[i], cf[i], ent[i]});
  }
  return out;
}

}  // namespace bangbang::learn
