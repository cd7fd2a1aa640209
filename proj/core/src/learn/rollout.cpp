#include "bangbang/learn/rollout.hpp"

#include "bangbang/error.hpp"

namespace bangbang::learn {
namespace {

Matrix row(const std::vector<double>& v) {
  Matrix m(1, static_cast<Index>(v.size()));
  for (Index i = 0; i < m.cols(); ++i) m(0, i) = v[i];
  return m;
}

std::vector<double> row_of(const Matrix& m, Index r) {
  std::vector<double> out(m.cols());
  for (Index c = 0; c < m.cols(); ++c) out[c] = m(r, c);
  return out;
}

}  // namespace

EnvPool::EnvPool(const envsim::EnvConfig& cfg, int num_envs, std::uint64_t master_seed) {
  if (num_envs < 1) throw ConfigError("num_envs must be >= 1");
  for (int i = 0; i < num_envs; ++i) {
    envs_.push_back(envsim::make_environment(cfg, derive_seed(master_seed, "env", i)));
  }
  obs_.resize(num_envs, envs_[0]->observation_dim());
  for (int i = 0; i < num_envs; ++i) obs_.row(i) = row(envs_[i]->reset());
  running_.assign(num_envs, 0.0);
}

void EnvPool::step(const Matrix& executed, std::vector<double>& rewards,
                   std::vector<std::uint8_t>& dones, Matrix* reached) {
  if (executed.rows() != size()) throw ShapeError("one action row per environment expected");
  rewards.assign(size(), 0.0);
  dones.assign(size(), 0);
  if (reached) reached->resize(size(), obs_.cols());
  for (int i = 0; i < size(); ++i) {
    const auto a = row_of(executed, i);
    auto res = envs_[i]->step(a);
    rewards[i] = res.reward;
    dones[i] = res.done ? 1 : 0;
    running_[i] += res.reward;
    if (reached) reached->row(i) = row(res.next_obs);
    if (res.done) {
      finished_.push_back(running_[i]);
      running_[i] = 0.0;
      obs_.row(i) = row(envs_[i]->reset());
    } else {
      obs_.row(i) = row(res.next_obs);
    }
  }
  env_steps_ += size();
}

std::vector<double> EnvPool::drain_episode_returns() {
  std::vector<double> out;
  out.swap(finished_);
  return out;
}

std::vector<Trajectory> collect_rollouts(const Policy& policy, const nn::Mlp* value_fn,
                                         EnvPool& pool, int horizon, Rng& rng) {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  nn::NoGradGuard guard;
  const int n = pool.size();
  const int od = static_cast<int>(pool.observations().cols());
  const int d = policy.action_spec().dim;
  std::vector<Trajectory> trajs(n);
  for (auto& tr : trajs) {
    tr.obs.resize(horizon, od);
    tr.actions.resize(horizon, d);
    tr.executed.resize(horizon, d);
    tr.rewards.reserve(horizon);
    tr.log_probs.reserve(horizon);
    tr.values.reserve(horizon);
    tr.next_values.reserve(horizon);
    tr.dones.reserve(horizon);
  }
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  for (int t = 0; t < horizon; ++t) {
    const Matrix obs = pool.observations();
    const heads::Head head = policy.head(obs);
    const Matrix actions = heads::sample(head, policy.bijector(), rng);
    const Matrix lp = heads::log_prob(head, policy.bijector(), actions).value();
    const Matrix params = heads::distribution_params(head);
    const Matrix values = value_fn ? value_fn->predict(obs) : Matrix::Zero(n, 1);
    const Matrix executed = policy.executable(actions);
    Matrix reached;
    pool.step(executed, rewards, dones, &reached);
    const Matrix next_values = value_fn ? value_fn->predict(reached) : Matrix::Zero(n, 1);
    for (int i = 0; i < n; ++i) {
      auto& tr = trajs[i];
      if (t == 0) tr.head_params.resize(horizon, params.cols());
      tr.obs.row(t) = obs.row(i);
      tr.actions.row(t) = actions.row(i);
      tr.executed.row(t) = executed.row(i);
      tr.head_params.row(t) = params.row(i);
      tr.rewards.push_back(rewards[i]);
      tr.log_probs.push_back(lp(i, 0));
      tr.values.push_back(values(i, 0));
      tr.next_values.push_back(next_values(i, 0));
      tr.dones.push_back(dones[i]);
    }
  }
  const Matrix last = value_fn ? value_fn->predict(pool.observations()) : Matrix::Zero(n, 1);
  for (int i = 0; i < n; ++i) trajs[i].bootstrap_value = last(i, 0);
  return trajs;
}

EpisodeRecord run_episode(const Policy& policy, envsim::Environment& env, bool deterministic,
                          Rng* rng) {
  if (!deterministic && rng == nullptr) throw Error("stochastic episodes need an rng");
  EpisodeRecord rec;
  const int steps = env.episode_length();
  const int d = env.action_spec().dim;
  rec.executed.resize(steps, d);
  std::vector<double> obs = env.reset();
  rec.states.resize(steps, static_cast<Index>(env.state().q.size()));
  int t = 0;
  for (; t < steps; ++t) {
    const Matrix o = row(obs);
    const Matrix a = policy.executable(deterministic ? policy.mode(o) : policy.sample(o, *rng));
    auto res = env.step(row_of(a, 0));
    rec.executed.row(t) = a.row(0);
    const auto& q = env.state().q;
    for (std::size_t k = 0; k < q.size(); ++k) rec.states(t, static_cast<Index>(k)) = q[k];
    rec.total_return += res.reward;
    obs = std::move(res.next_obs);
    if (res.done) {
      ++t;
      break;
    }
  }
  rec.executed.conservativeResize(t, d);
  rec.states.conservativeResize(t, rec.states.cols());
  return rec;
}

}  // namespace bangbang::learn
