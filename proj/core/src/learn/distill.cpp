#include "bangbang/learn/distill.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "bangbang/csv.hpp"
#include "bangbang/error.hpp"
#include "bangbang/nn/ops.hpp"

namespace bangbang::learn {

void DistillConfig::validate() const {
  if (budget < 0) throw ConfigError("distill.budget must be >= 0");
  if (horizon < 1 || num_envs < 1 || epochs < 1 || minibatch < 1) {
    throw ConfigError("distill horizon, num_envs, epochs and minibatch must be >= 1");
  }
  if (!(lr > 0.0)) throw ConfigError("distill.lr must be > 0");
  if (eval_interval < 1 || eval_episodes < 1) {
    throw ConfigError("distill eval_interval and eval_episodes must be >= 1");
  }
}

DistillConfig DistillConfig::from_config(const Config& cfg) {
  DistillConfig d;
  d.budget = cfg.get_int("distill.budget", d.budget);
  d.horizon = static_cast<int>(cfg.get_int("distill.horizon", d.horizon));
  d.num_envs = static_cast<int>(cfg.get_int("distill.num_envs", d.num_envs));
  d.epochs = static_cast<int>(cfg.get_int("distill.epochs", d.epochs));
  d.minibatch = static_cast<int>(cfg.get_int("distill.minibatch", d.minibatch));
  d.lr = cfg.get_double("distill.lr", d.lr);
  d.eval_interval = cfg.get_int("distill.eval_interval", d.eval_interval);
  d.eval_episodes = static_cast<int>(cfg.get_int("distill.eval_episodes", d.eval_episodes));
  d.validate();
  return d;
}

void DistillConfig::to_config(Config& cfg) const {
  cfg.set("distill.budget", std::to_string(budget));
  cfg.set("distill.horizon", std::to_string(horizon));
  cfg.set("distill.num_envs", std::to_string(num_envs));
  cfg.set("distill.epochs", std::to_string(epochs));
  cfg.set("distill.minibatch", std::to_string(minibatch));
  cfg.set("distill.lr", format_double(lr));
  cfg.set("distill.eval_interval", std::to_string(eval_interval));
  cfg.set("distill.eval_episodes", std::to_string(eval_episodes));
}

std::vector<std::string> DistillConfig::config_keys() {
  return {"distill.budget",    "distill.horizon", "distill.num_envs",      "distill.epochs",
          "distill.minibatch", "distill.lr",      "distill.eval_interval", "distill.eval_episodes"};
}

Matrix teacher_targets(const Policy& teacher, const Matrix& obs, heads::HeadKind student) {
  Matrix a = teacher.executable(teacher.mode(obs));
  if (student == heads::HeadKind::kGaussian) return a;
  const auto& a_max = teacher.action_spec().a_max;
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index c = 0; c < a.cols(); ++c) {
      const int idx = heads::discretize_teacher_action(a(r, c), a_max[c], student);
      if (student == heads::HeadKind::kBernoulli) {
        a(r, c) = idx == 1 ? a_max[c] : -a_max[c];
      } else {
        a(r, c) = (idx - 1) * a_max[c];
      }
    }
  }
  return a;
}

Tensor bc_loss(const Policy& student, const Matrix& obs, const Matrix& targets) {
  return nn::neg(nn::mean(student.log_prob(obs, targets)));
}

DistillResult distill(const Policy& teacher, const PolicyConfig& student_cfg,
                      const envsim::EnvConfig& env, const DistillConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto probe = envsim::make_environment(env);
  if (probe->observation_dim() != teacher.obs_dim() ||
      probe->action_spec().dim != teacher.action_spec().dim) {
    throw ShapeError("teacher does not match the environment's dimensions");
  }
  if (teacher.kind() != heads::HeadKind::kGaussian) throw ConfigError("teacher must be gaussian");
  Rng init_rng = make_rng(seed, "policy_init");
  Policy student(probe->observation_dim(), probe->action_spec(), student_cfg, init_rng);
  nn::AdamConfig ac;
  ac.lr = cfg.lr;
  nn::Adam opt(student.parameters(), ac);

  DistillResult result;
  if (cfg.budget > 0) {
    EnvPool pool(env, cfg.num_envs, seed);
    Rng act_rng = make_rng(seed, "rollout");
    Rng batch_rng = make_rng(seed, "minibatch");
    long long next_eval = cfg.eval_interval;
    while (pool.env_steps() < cfg.budget) {
      const long long remaining = cfg.budget - pool.env_steps();
      const int horizon = static_cast<int>(
          std::min<long long>(cfg.horizon, (remaining + cfg.num_envs - 1) / cfg.num_envs));
      auto trajs = collect_rollouts(student, nullptr, pool, horizon, act_rng);
      Index total = 0;
      for (const auto& tr : trajs) total += static_cast<Index>(tr.size());
      Matrix obs(total, trajs[0].obs.cols());
      Index at = 0;
      for (const auto& tr : trajs) {
        obs.middleRows(at, static_cast<Index>(tr.size())) = tr.obs;
        at += static_cast<Index>(tr.size());
      }
      const Matrix targets = teacher_targets(teacher, obs, student_cfg.head);
      std::vector<Index> order(total);
      std::iota(order.begin(), order.end(), Index{0});
      double last_loss = 0.0;
      for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), batch_rng);
        double sum = 0.0;
        int n = 0;
        for (Index start = 0; start < total; start += cfg.minibatch) {
          const Index count = std::min<Index>(cfg.minibatch, total - start);
          Matrix mo(count, obs.cols()), mt(count, targets.cols());
          for (Index i = 0; i < count; ++i) {
            mo.row(i) = obs.row(order[start + i]);
            mt.row(i) = targets.row(order[start + i]);
          }
          Tensor loss = bc_loss(student, mo, mt);
          opt.zero_grad();
          loss.backward();
          opt.step();
          sum += loss.item();
          ++n;
        }
        last_loss = sum / n;
      }
      const bool last = pool.env_steps() >= cfg.budget;
      if (pool.env_steps() >= next_eval || last) {
        const EvalResult ev = evaluate(student, env, cfg.eval_episodes, seed);
        result.curve.push_back({pool.env_steps(), ev.mean, ev.std, last_loss});
        while (next_eval <= pool.env_steps()) next_eval += cfg.eval_interval;
      }
    }
  }
  result.checkpoint.policy = std::move(student);
  result.checkpoint.env = env;
  result.checkpoint.policy_optimizer = opt.moments();
  return result;
}

void write_distill_csv(std::ostream& out, const std::vector<DistillPoint>& curve) {
  CsvWriter w(out, {"env_steps", "mean_return", "std_return", "bc_loss"});
  for (const auto& p : curve) {
    w.cell(p.env_steps).cell(p.mean_return).cell(p.std_return).cell(p.bc_loss);
    w.end_row();
  }
}

}  // namespace bangbang::learn
