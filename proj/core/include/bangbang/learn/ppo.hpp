#pragma once

#include <string>
#include <vector>

#include "bangbang/config.hpp"
#include "bangbang/learn/policy.hpp"
#include "bangbang/learn/rollout.hpp"
#include "bangbang/nn/adam.hpp"

namespace bangbang::learn {

struct PPOConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip_eps = 0.2;
  double kl_stop = 0.02;
  int epochs = 10;
  int minibatch = 256;
  double lr = 1e-3;
  int horizon = 200;
  int num_envs = 8;
  double entropy_coef = 1e-3;
  double max_grad_norm = 0.0;  // 0 disables clipping
  // Treat episode ends as time-limit truncations and bootstrap through them.
  bool bootstrap_time_limit = true;

  void validate() const;
  // Keys under [trainer].
  static PPOConfig from_config(const Config& cfg);
  void to_config(Config& cfg) const;
  static std::vector<std::string> config_keys();
};

// Flattened rollout with advantages, ready for minibatching.
struct PPOBatch {
  Matrix obs;
  Matrix actions;
  Matrix head_params;  // behavior distribution per row
  std::vector<double> log_probs;
  std::vector<double> advantages;  // normalized
  std::vector<double> returns;

  std::size_t size() const { return log_probs.size(); }
  PPOBatch subset(std::span<const Index> rows) const;
};

PPOBatch make_batch(const std::vector<Trajectory>& trajs, const PPOConfig& cfg);

struct PPODiagnostics {
  double mean_kl = 0.0;     // KL(new || behavior) over the whole batch after the update
  double clip_frac = 0.0;   // fraction of samples with |ratio - 1| > clip_eps, last epoch
  double entropy = 0.0;     // mean policy entropy on the batch after the update
  double policy_loss = 0.0;
  double value_loss = 0.0;
  int epochs_run = 0;
  bool early_stopped = false;
  bool aborted = false;     // non-finite loss; parameters restored
};

// -mean(min(rho A, clip(rho, 1 +- eps) A)) - entropy_coef * mean(entropy)
Tensor ppo_policy_loss(const Policy& policy, const PPOBatch& batch, const PPOConfig& cfg,
                       double* clip_frac = nullptr, double* mean_kl = nullptr);
Tensor value_loss(const nn::Mlp& value_fn, const PPOBatch& batch);

// Policy, value network and their optimizers.
struct PPOLearner {
  Policy policy;
  nn::Mlp value_fn;
  nn::Adam policy_opt;
  nn::Adam value_opt;

  PPOLearner(Policy p, nn::Mlp v, const PPOConfig& cfg);
};

// Epochs of shuffled minibatch updates. Stops before any further minibatch
// once the minibatch KL from the behavior policy exceeds kl_stop.
PPODiagnostics ppo_update(PPOLearner& learner, const PPOBatch& batch, const PPOConfig& cfg,
                          Rng& rng);

}  // namespace bangbang::learn
