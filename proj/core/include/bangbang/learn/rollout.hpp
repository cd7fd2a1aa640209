#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "bangbang/envsim/factory.hpp"
#include "bangbang/learn/policy.hpp"

namespace bangbang::learn {

// One environment's segment of a rollout. Row t of each matrix is step t.
struct Trajectory {
  Matrix obs;       // T x obs_dim, the observation the action was chosen from
  Matrix actions;   // T x D as sampled (Gaussian samples may exceed the box)
  Matrix executed;  // T x D as applied to the environment
  std::vector<double> rewards;
  std::vector<double> log_probs;  // behavior log-probabilities at sampling time
  std::vector<double> values;
  std::vector<double> next_values;  // V of the observation reached by step t, before any reset
  std::vector<std::uint8_t> dones;  // episode ended after step t
  Matrix head_params;               // behavior distribution, see heads::distribution_params
  double bootstrap_value = 0.0;     // V(s_T); unused when the last step is done

  std::size_t size() const { return rewards.size(); }
};

// A fixed set of environments that persist across rollouts, so episodes may
// straddle batch boundaries.
class EnvPool {
 public:
  // Environment i resets from stream ("env", i) of `master_seed`.
  EnvPool(const envsim::EnvConfig& cfg, int num_envs, std::uint64_t master_seed);

  int size() const { return static_cast<int>(envs_.size()); }
  envsim::Environment& env(int i) { return *envs_[i]; }
  const Matrix& observations() const { return obs_; }

  // Step every environment with row i of `executed`; resets finished ones.
  // Fills rewards, done flags and the observations reached before any reset.
  void step(const Matrix& executed, std::vector<double>& rewards, std::vector<std::uint8_t>& dones,
            Matrix* reached = nullptr);

  // Returns of episodes completed since the last call.
  std::vector<double> drain_episode_returns();
  long long env_steps() const { return env_steps_; }

 private:
  std::vector<std::unique_ptr<envsim::Environment>> envs_;
  Matrix obs_;
  std::vector<double> running_;
  std::vector<double> finished_;
  long long env_steps_ = 0;
};

// `horizon` steps from every environment in the pool. `value_fn` may be null,
// in which case value estimates are zero.
std::vector<Trajectory> collect_rollouts(const Policy& policy, const nn::Mlp* value_fn,
                                         EnvPool& pool, int horizon, Rng& rng);

// Undiscounted return of one episode with deterministic actions.
struct EpisodeRecord {
  double total_return = 0.0;
  Matrix executed;  // steps x D
  Matrix states;    // steps x physical position coordinates (q) after each step
};

EpisodeRecord run_episode(const Policy& policy, envsim::Environment& env, bool deterministic,
                          Rng* rng = nullptr);

}  // namespace bangbang::learn
