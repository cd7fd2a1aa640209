#include "bangbang/learn/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bangbang/csv.hpp"
#include "bangbang/error.hpp"
#include "bangbang/learn/gae.hpp"
#include "bangbang/nn/ops.hpp"

namespace bangbang::learn {
namespace {

Matrix column(const std::vector<double>& v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  for (Index i = 0; i < m.rows(); ++i) m(i, 0) = v[i];
  return m;
}

Matrix take_rows(const Matrix& m, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (Index i = 0; i < out.rows(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

}  // namespace

void PPOConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("trainer.gamma must lie in [0, 1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("trainer.lambda must lie in [0, 1]");
  if (!(clip_eps > 0.0)) throw ConfigError("trainer.clip_eps must be > 0");
  if (!(kl_stop > 0.0)) throw ConfigError("trainer.kl_stop must be > 0");
  if (epochs < 1 || minibatch < 1 || horizon < 1 || num_envs < 1) {
    throw ConfigError("trainer epochs, minibatch, horizon and num_envs must be >= 1");
  }
  if (!(lr > 0.0)) throw ConfigError("trainer.lr must be > 0");
  if (entropy_coef < 0.0 || max_grad_norm < 0.0) {
    throw ConfigError("trainer.entropy_coef and trainer.max_grad_norm must be >= 0");
  }
}

PPOConfig PPOConfig::from_config(const Config& cfg) {
  PPOConfig c;
  c.gamma = cfg.get_double("trainer.gamma", c.gamma);
  c.lambda = cfg.get_double("trainer.lambda", c.lambda);
  c.clip_eps = cfg.get_double("trainer.clip_eps", c.clip_eps);
  c.kl_stop = cfg.get_double("trainer.kl_stop", c.kl_stop);
  c.epochs = static_cast<int>(cfg.get_int("trainer.epochs", c.epochs));
  c.minibatch = static_cast<int>(cfg.get_int("trainer.minibatch", c.minibatch));
  c.lr = cfg.get_double("trainer.lr", c.lr);
  c.horizon = static_cast<int>(cfg.get_int("trainer.horizon", c.horizon));
  c.num_envs = static_cast<int>(cfg.get_int("trainer.num_envs", c.num_envs));
  c.entropy_coef = cfg.get_double("trainer.entropy_coef", c.entropy_coef);
  c.max_grad_norm = cfg.get_double("trainer.max_grad_norm", c.max_grad_norm);
  c.bootstrap_time_limit = cfg.get_bool("trainer.bootstrap_time_limit", c.bootstrap_time_limit);
  c.validate();
  return c;
}

void PPOConfig::to_config(Config& cfg) const {
  cfg.set("trainer.gamma", format_double(gamma));
  cfg.set("trainer.lambda", format_double(lambda));
  cfg.set("trainer.clip_eps", format_double(clip_eps));
  cfg.set("trainer.kl_stop", format_double(kl_stop));
  cfg.set("trainer.epochs", std::to_string(epochs));
  cfg.set("trainer.minibatch", std::to_string(minibatch));
  cfg.set("trainer.lr", format_double(lr));
  cfg.set("trainer.horizon", std::to_string(horizon));
  cfg.set("trainer.num_envs", std::to_string(num_envs));
  cfg.set("trainer.entropy_coef", format_double(entropy_coef));
  cfg.set("trainer.max_grad_norm", format_double(max_grad_norm));
  cfg.set("trainer.bootstrap_time_limit", bootstrap_time_limit ? "true" : "false");
}

std::vector<std::string> PPOConfig::config_keys() {
  return {"trainer.gamma",   "trainer.lambda",   "trainer.clip_eps",     "trainer.kl_stop",
          "trainer.epochs",  "trainer.minibatch", "trainer.lr",          "trainer.horizon",
          "trainer.num_envs", "trainer.entropy_coef", "trainer.max_grad_norm",
          "trainer.bootstrap_time_limit"};
}

PPOBatch PPOBatch::subset(std::span<const Index> rows) const {
  PPOBatch b;
  b.obs = take_rows(obs, rows);
  b.actions = take_rows(actions, rows);
  b.head_params = take_rows(head_params, rows);
  for (Index r : rows) {
    b.log_probs.push_back(log_probs[r]);
    b.advantages.push_back(advantages[r]);
    b.returns.push_back(returns[r]);
  }
  return b;
}

PPOBatch make_batch(const std::vector<Trajectory>& trajs, const PPOConfig& cfg) {
  if (trajs.empty()) throw Error("empty rollout");
  Index total = 0;
  for (const auto& tr : trajs) total += static_cast<Index>(tr.size());
  PPOBatch b;
  b.obs.resize(total, trajs[0].obs.cols());
  b.actions.resize(total, trajs[0].actions.cols());
  b.head_params.resize(total, trajs[0].head_params.cols());
  Index at = 0;
  for (const auto& tr : trajs) {
    const auto n = static_cast<Index>(tr.size());
    b.obs.middleRows(at, n) = tr.obs;
    b.actions.middleRows(at, n) = tr.actions;
    b.head_params.middleRows(at, n) = tr.head_params;
    auto gae = cfg.bootstrap_time_limit
                   ? compute_gae_truncated(tr.rewards, tr.values, tr.next_values, tr.dones,
                                           cfg.gamma, cfg.lambda)
                   : compute_gae(tr.rewards, tr.values, tr.dones, tr.bootstrap_value, cfg.gamma,
                                 cfg.lambda);
    b.log_probs.insert(b.log_probs.end(), tr.log_probs.begin(), tr.log_probs.end());
    b.advantages.insert(b.advantages.end(), gae.advantages.begin(), gae.advantages.end());
    b.returns.insert(b.returns.end(), gae.returns.begin(), gae.returns.end());
    at += n;
  }
  normalize(b.advantages);
  return b;
}

Tensor ppo_policy_loss(const Policy& policy, const PPOBatch& batch, const PPOConfig& cfg,
                       double* clip_frac, double* mean_kl) {
  const heads::Head head = policy.head(batch.obs);
  Tensor lp = heads::log_prob(head, policy.bijector(), batch.actions);
  Tensor ratio = nn::exp(nn::sub(lp, Tensor::constant(column(batch.log_probs))));
  Tensor adv = Tensor::constant(column(batch.advantages));
  Tensor unclipped = nn::mul(ratio, adv);
  Tensor clipped = nn::mul(nn::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps), adv);
  Tensor surrogate = nn::mean(nn::minimum(unclipped, clipped));
  Tensor ent = nn::mean(heads::entropy(head));
  if (clip_frac) {
    const Matrix& r = ratio.value();
    *clip_frac = static_cast<double>(((r.array() - 1.0).abs() > cfg.clip_eps).count()) /
                 static_cast<double>(r.size());
  }
  if (mean_kl) {
    nn::NoGradGuard guard;
    const heads::Head old = heads::head_from_params(policy.kind(), batch.head_params);
    *mean_kl = heads::kl(head, old).value().mean();
  }
  return nn::neg(nn::add(surrogate, nn::scale(ent, cfg.entropy_coef)));
}

Tensor value_loss(const nn::Mlp& value_fn, const PPOBatch& batch) {
  Tensor v = value_fn.forward(Tensor::constant(batch.obs));
  return nn::mean(nn::square(nn::sub(v, Tensor::constant(column(batch.returns)))));
}

PPOLearner::PPOLearner(Policy p, nn::Mlp v, const PPOConfig& cfg)
    : policy(std::move(p)), value_fn(std::move(v)) {
  nn::AdamConfig ac;
  ac.lr = cfg.lr;
  policy_opt = nn::Adam(policy.parameters(), ac);
  value_opt = nn::Adam(value_fn.parameters(), ac);
}

PPODiagnostics ppo_update(PPOLearner& learner, const PPOBatch& batch, const PPOConfig& cfg,
                          Rng& rng) {
  PPODiagnostics diag;
  const auto n = static_cast<Index>(batch.size());
  if (n == 0) return diag;
  const std::vector<double> policy_before = learner.policy.flat();
  const std::vector<double> value_before = learner.value_fn.flat();
  const nn::AdamMoments pol_m = learner.policy_opt.moments();
  const nn::AdamMoments val_m = learner.value_opt.moments();

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  try {
    bool stop = false;
    for (int epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double clipped = 0.0, processed = 0.0;
      double pl_sum = 0.0, vl_sum = 0.0;
      int batches = 0;
      for (Index start = 0; start < n; start += cfg.minibatch) {
        const Index count = std::min<Index>(cfg.minibatch, n - start);
        const PPOBatch mb = batch.subset(std::span<const Index>(order).subspan(start, count));
        double cf = 0.0, kl = 0.0;
        Tensor pl = ppo_policy_loss(learner.policy, mb, cfg, &cf, &kl);
        if (kl > cfg.kl_stop) {
          diag.early_stopped = true;
          stop = true;
          break;
        }
        learner.policy_opt.zero_grad();
        pl.backward();
        if (cfg.max_grad_norm > 0.0) learner.policy_opt.clip_grad_norm(cfg.max_grad_norm);
        learner.policy_opt.step();

        Tensor vl = value_loss(learner.value_fn, mb);
        learner.value_opt.zero_grad();
        vl.backward();
        if (cfg.max_grad_norm > 0.0) learner.value_opt.clip_grad_norm(cfg.max_grad_norm);
        learner.value_opt.step();

        clipped += cf * static_cast<double>(count);
        processed += static_cast<double>(count);
        pl_sum += pl.item();
        vl_sum += vl.item();
        ++batches;
      }
      if (batches > 0) {
        diag.epochs_run = epoch + 1;
        diag.clip_frac = clipped / processed;
        diag.policy_loss = pl_sum / batches;
        diag.value_loss = vl_sum / batches;
      }
    }
  } catch (const NumericError&) {
    learner.policy.set_flat(policy_before);
    learner.value_fn.set_flat(value_before);
    learner.policy_opt.set_moments(pol_m);
    learner.value_opt.set_moments(val_m);
    learner.policy.zero_grad();
    learner.value_fn.zero_grad();
    diag.aborted = true;
  }
  {
    nn::NoGradGuard guard;
    const heads::Head head = learner.policy.head(batch.obs);
    const heads::Head old = heads::head_from_params(learner.policy.kind(), batch.head_params);
    diag.mean_kl = heads::kl(head, old).value().mean();
    diag.entropy = heads::entropy(head).value().mean();
  }
  return diag;
}

}  // namespace bangbang::learn
