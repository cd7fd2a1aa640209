#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bangbang/error.hpp"
#include "bangbang/learn/checkpoint.hpp"
#include "bangbang/learn/distill.hpp"
#include "bangbang/learn/gae.hpp"
#include "bangbang/learn/ppo.hpp"
#include "bangbang/learn/rollout.hpp"
#include "bangbang/learn/train.hpp"
#include "bangbang/nn/ops.hpp"
#include "testing.hpp"

namespace bangbang::learn {
namespace {

using testing::max_rel_error;
using testing::numeric_grad;

// A_t = sum_k (gamma lambda)^k delta_{t+k}, with the sum cut after a done.
std::vector<double> brute_gae(const std::vector<double>& r, const std::vector<double>& v,
                              const std::vector<std::uint8_t>& d, double boot, double g,
                              double l) {
  const std::size_t n = r.size();
  std::vector<double> delta(n), out(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const double next = t + 1 < n ? v[t + 1] : boot;
    delta[t] = r[t] + g * next * (1 - d[t]) - v[t];
  }
  for (std::size_t t = 0; t < n; ++t) {
    double w = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      out[t] += w * delta[k];
      if (d[k]) break;
      w *= g * l;
    }
  }
  return out;
}

TEST(Gae, LambdaZeroIsTdError) {
  std::vector<double> r = {1.0, 0.5, -1.0}, v = {0.2, 0.3, 0.4};
  std::vector<std::uint8_t> d = {0, 0, 0};
  auto res = compute_gae(r, v, d, 0.7, 0.9, 0.0);
  EXPECT_DOUBLE_EQ(res.advantages[0], 1.0 + 0.9 * 0.3 - 0.2);
  EXPECT_DOUBLE_EQ(res.advantages[2], -1.0 + 0.9 * 0.7 - 0.4);
  EXPECT_DOUBLE_EQ(res.returns[1], res.advantages[1] + 0.3);
}

TEST(Gae, LambdaOneIsMonteCarlo) {
  std::vector<double> r = {1.0, 2.0, 3.0}, v = {0.5, -0.5, 0.25};
  std::vector<std::uint8_t> d = {0, 0, 1};
  auto res = compute_gae(r, v, d, 99.0, 0.9, 1.0);
  EXPECT_NEAR(res.advantages[0], 1.0 + 0.9 * 2.0 + 0.81 * 3.0 - 0.5, 1e-12);
  EXPECT_NEAR(res.advantages[1], 2.0 + 0.9 * 3.0 + 0.5, 1e-12);
}

TEST(Gae, MatchesBruteForce) {
  Rng rng(1);
  for (int draw = 0; draw < 200; ++draw) {
    std::vector<double> r(5), v(5);
    std::vector<std::uint8_t> d(5);
    for (int t = 0; t < 5; ++t) {
      r[t] = standard_normal(rng);
      v[t] = standard_normal(rng);
      d[t] = uniform(rng, 0.0, 1.0) < 0.3;
    }
    const double boot = standard_normal(rng), g = 0.99, l = uniform(rng, 0.0, 1.0);
    auto res = compute_gae(r, v, d, boot, g, l);
    auto ref = brute_gae(r, v, d, boot, g, l);
    for (int t = 0; t < 5; ++t) EXPECT_NEAR(res.advantages[t], ref[t], 1e-12);
  }
}

TEST(Gae, TruncatedBootstrapsThroughEpisodeEnds) {
  std::vector<double> r = {1.0, 1.0}, v = {0.0, 0.0}, nv = {2.0, 3.0};
  std::vector<std::uint8_t> d = {1, 0};
  auto res = compute_gae_truncated(r, v, nv, d, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(res.advantages[0], 1.0 + 0.5 * 2.0);
  EXPECT_DOUBLE_EQ(res.advantages[1], 1.0 + 0.5 * 3.0);
}

TEST(Gae, LengthMismatchThrows) {
  std::vector<double> r = {1.0, 2.0}, v = {0.0};
  std::vector<std::uint8_t> d = {0, 0};
  EXPECT_THROW(compute_gae(r, v, d, 0.0, 0.9, 0.9), Error);
}

TEST(Gae, NormalizeGivesZeroMeanUnitStd) {
  Rng rng(2);
  std::vector<double> x(1000);
  for (auto& e : x) e = 3.0 + 10.0 * standard_normal(rng);
  normalize(x);
  double m = 0.0, s = 0.0;
  for (double e : x) m += e;
  m /= x.size();
  for (double e : x) s += (e - m) * (e - m);
  EXPECT_LT(std::abs(m), 1e-9);
  EXPECT_NEAR(std::sqrt(s / x.size()), 1.0, 1e-6);
  std::vector<double> c(4, 2.5);
  normalize(c);
  for (double e : c) EXPECT_EQ(e, 0.0);
}

envsim::EnvConfig pendulum_env() {
  envsim::EnvConfig e;
  e.env_id = envsim::EnvId::kPendulum;
  return e;
}

Policy make_policy(heads::HeadKind kind, int obs_dim, int dim, std::uint64_t seed) {
  PolicyConfig pc;
  pc.head = kind;
  pc.hidden = {16};
  pc.output_scale = 1.0;
  Rng rng(seed);
  return Policy(obs_dim, envsim::ActionSpec::uniform(dim, 2.0), pc, rng);
}

// A synthetic batch whose behavior policy is a perturbed copy of `policy`.
PPOBatch synthetic_batch(const Policy& policy, Rng& rng, Index n) {
  Policy behavior = policy.clone();
  auto flat = behavior.flat();
  for (auto& w : flat) w += 0.05 * standard_normal(rng);
  behavior.set_flat(flat);
  PPOBatch b;
  b.obs.resize(n, policy.obs_dim());
  for (Index i = 0; i < b.obs.size(); ++i) b.obs.data()[i] = standard_normal(rng);
  b.actions = behavior.sample(b.obs, rng);
  b.head_params = heads::distribution_params(behavior.head(b.obs));
  Matrix lp = behavior.log_prob(b.obs, b.actions).value();
  for (Index i = 0; i < n; ++i) {
    b.log_probs.push_back(lp(i, 0));
    b.advantages.push_back(standard_normal(rng));
    b.returns.push_back(standard_normal(rng));
  }
  return b;
}

TEST(Ppo, ClipArithmetic) {
  Policy p = make_policy(heads::HeadKind::kGaussian, 2, 1, 3);
  Rng rng(3);
  PPOBatch b = synthetic_batch(p, rng, 1);
  PPOConfig cfg;
  cfg.entropy_coef = 0.0;
  // Choose the behavior log-prob so that rho = 1.5.
  const double lp = p.log_prob(b.obs, b.actions).item();
  b.log_probs[0] = lp - std::log(1.5);
  b.advantages[0] = 2.0;
  EXPECT_NEAR(ppo_policy_loss(p, b, cfg).item(), -1.2 * 2.0, 1e-12);
  b.advantages[0] = -2.0;
  EXPECT_NEAR(ppo_policy_loss(p, b, cfg).item(), 1.5 * 2.0, 1e-12);
}

TEST(Ppo, UnitRatioGradientIsPolicyGradient) {
  for (auto kind : {heads::HeadKind::kGaussian, heads::HeadKind::kBernoulli,
                    heads::HeadKind::kCategorical}) {
    Policy p = make_policy(kind, 3, 2, 4);
    Rng rng(4);
    PPOBatch b = synthetic_batch(p, rng, 32);
    Matrix lp = p.log_prob(b.obs, b.actions).value();
    for (Index i = 0; i < lp.rows(); ++i) b.log_probs[i] = lp(i, 0);
    PPOConfig cfg;
    cfg.entropy_coef = 0.0;
    p.zero_grad();
    ppo_policy_loss(p, b, cfg).backward();
    std::vector<Matrix> ppo_grads;
    for (const auto& t : p.parameters()) ppo_grads.push_back(t.grad());
    p.zero_grad();
    Matrix adv(32, 1);
    for (Index i = 0; i < 32; ++i) adv(i, 0) = b.advantages[i];
    nn::neg(nn::mean(nn::mul(p.log_prob(b.obs, b.actions), Tensor::constant(adv)))).backward();
    const auto params = p.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) {
      EXPECT_LT(max_rel_error(ppo_grads[k], params[k].grad()), 1e-12);
    }
  }
}

TEST(Ppo, LossGradientsMatchFiniteDifferences) {
  for (auto kind : {heads::HeadKind::kGaussian, heads::HeadKind::kBernoulli,
                    heads::HeadKind::kCategorical}) {
    Policy p = make_policy(kind, 3, 2, 5);
    Rng rng(5);
    PPOBatch b = synthetic_batch(p, rng, 16);
    PPOConfig cfg;
    p.zero_grad();
    ppo_policy_loss(p, b, cfg).backward();
    for (auto t : p.parameters()) {
      Matrix analytic = t.grad();
      EXPECT_LT(max_rel_error(analytic,
                              numeric_grad(t, [&] { return ppo_policy_loss(p, b, cfg).item(); })),
                1e-4);
    }
  }
}

TEST(Ppo, UpdateImprovesHeldSurrogate) {
  Policy p = make_policy(heads::HeadKind::kGaussian, 3, 1, 6);
  Rng rng(6);
  PPOBatch b = synthetic_batch(p, rng, 512);
  PPOConfig cfg;
  cfg.epochs = 1;
  cfg.kl_stop = 1e9;
  Rng init(7);
  PPOLearner learner(p.clone(), make_value_net(3, p.config(), init), cfg);
  const double before = ppo_policy_loss(learner.policy, b, cfg).item();
  auto diag = ppo_update(learner, b, cfg, rng);
  EXPECT_FALSE(diag.aborted);
  EXPECT_LT(ppo_policy_loss(learner.policy, b, cfg).item(), before);
}

TEST(Ppo, KlEarlyStopHaltsEpochs) {
  Policy p = make_policy(heads::HeadKind::kGaussian, 3, 1, 8);
  Rng rng(8);
  PPOBatch b = synthetic_batch(p, rng, 256);
  PPOConfig cfg;
  cfg.lr = 0.05;
  cfg.kl_stop = 1e-4;
  cfg.epochs = 50;
  cfg.minibatch = 64;
  Rng init(9);
  PPOLearner learner(p.clone(), make_value_net(3, p.config(), init), cfg);
  auto diag = ppo_update(learner, b, cfg, rng);
  EXPECT_TRUE(diag.early_stopped);
  EXPECT_LT(diag.epochs_run, 50);
}

TEST(Ppo, NonFiniteLossRestoresParameters) {
  Policy p = make_policy(heads::HeadKind::kGaussian, 3, 1, 10);
  Rng rng(10);
  PPOBatch b = synthetic_batch(p, rng, 64);
  b.advantages[3] = std::nan("");
  PPOConfig cfg;
  Rng init(11);
  PPOLearner learner(p.clone(), make_value_net(3, p.config(), init), cfg);
  const auto before = learner.policy.flat();
  auto diag = ppo_update(learner, b, cfg, rng);
  EXPECT_TRUE(diag.aborted);
  EXPECT_EQ(learner.policy.flat(), before);
}

// Single-step bandit: +1 for +a_max, 0 otherwise.
TEST(Ppo, BernoulliSolvesTwoArmedBandit) {
  Policy p = make_policy(heads::HeadKind::kBernoulli, 1, 1, 12);
  PPOConfig cfg;
  cfg.bootstrap_time_limit = false;
  cfg.minibatch = 50;
  cfg.lr = 1e-2;
  Rng init(12), rng(13);
  PPOLearner learner(p, make_value_net(1, p.config(), init), cfg);
  const Matrix obs = Matrix::Zero(200, 1);
  for (int it = 0; it < 10; ++it) {
    Trajectory tr;
    tr.obs = obs;
    tr.actions = learner.policy.sample(obs, rng);
    tr.executed = tr.actions;
    tr.head_params = heads::distribution_params(learner.policy.head(obs));
    Matrix lp = learner.policy.log_prob(obs, tr.actions).value();
    for (Index i = 0; i < 200; ++i) {
      tr.rewards.push_back(tr.actions(i, 0) > 0 ? 1.0 : 0.0);
      tr.log_probs.push_back(lp(i, 0));
      tr.values.push_back(0.0);
      tr.next_values.push_back(0.0);
      tr.dones.push_back(1);
    }
    ppo_update(learner, make_batch({tr}, cfg), cfg, rng);
  }
  auto head = std::get<heads::BernoulliHead>(learner.policy.head(Matrix::Zero(1, 1)));
  EXPECT_GT(head.probs.value()(0, 0), 0.99);
}

TEST(Rollout, DeterministicAndShaped) {
  Policy p = make_policy(heads::HeadKind::kBernoulli, 3, 1, 14);
  auto run = [&] {
    EnvPool pool(pendulum_env(), 3, 99);
    Rng rng(15);
    return collect_rollouts(p, nullptr, pool, 7, rng);
  };
  auto a = run(), b = run();
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].size(), 7u);
    EXPECT_EQ(a[i].actions, b[i].actions);
    EXPECT_EQ(a[i].rewards, b[i].rewards);
    EXPECT_EQ(a[i].log_probs, b[i].log_probs);
    EXPECT_TRUE((a[i].actions.array().abs() == 2.0).all());
  }
}

TEST(Rollout, HorizonOneMatchesSingleStep) {
  Policy p = make_policy(heads::HeadKind::kGaussian, 3, 1, 16);
  EnvPool pool(pendulum_env(), 1, 5);
  Rng rng(17);
  auto tr = collect_rollouts(p, nullptr, pool, 1, rng);
  auto env = envsim::make_environment(pendulum_env(), derive_seed(5, "env", 0));
  env->reset();
  auto step = env->step(std::vector<double>{tr[0].executed(0, 0)});
  EXPECT_EQ(tr[0].rewards[0], step.reward);
}

TEST(Rollout, RecordedLogProbsMatchRecomputation) {
  Policy p = make_policy(heads::HeadKind::kCategorical, 3, 1, 18);
  EnvPool pool(pendulum_env(), 2, 6);
  Rng rng(19);
  for (const auto& tr : collect_rollouts(p, nullptr, pool, 20, rng)) {
    Matrix lp = p.log_prob(tr.obs, tr.actions).value();
    for (Index i = 0; i < lp.rows(); ++i) EXPECT_NEAR(lp(i, 0), tr.log_probs[i], 1e-12);
  }
}

TrainConfig tiny_train(heads::HeadKind head, long long budget) {
  TrainConfig tc;
  tc.env = pendulum_env();
  tc.policy.head = head;
  tc.policy.hidden = {16};
  tc.ppo.num_envs = 2;
  tc.ppo.horizon = 50;
  tc.ppo.minibatch = 50;
  tc.ppo.epochs = 2;
  tc.budget = budget;
  tc.eval_interval = 100;
  tc.eval_episodes = 2;
  tc.seed = 3;
  return tc;
}

TEST(Train, ZeroBudgetReturnsInitialization) {
  TrainConfig tc = tiny_train(heads::HeadKind::kGaussian, 0);
  auto res = train(tc);
  EXPECT_EQ(res.env_steps, 0);
  auto again = train(tc);
  EXPECT_EQ(res.checkpoint.policy.flat(), again.checkpoint.policy.flat());
  auto moved = train(tiny_train(heads::HeadKind::kGaussian, 200));
  EXPECT_NE(moved.checkpoint.policy.flat(), res.checkpoint.policy.flat());
}

TEST(Train, SameSeedGivesIdenticalCurve) {
  auto csv = [] {
    auto res = train(tiny_train(heads::HeadKind::kBernoulli, 300));
    std::ostringstream out;
    write_curve_csv(out, res.curve);
    return out.str();
  };
  const std::string a = csv();
  EXPECT_EQ(a, csv());
  std::istringstream in(a);
  auto back = read_curve_csv(in);
  EXPECT_FALSE(back.empty());
}

TEST(Checkpoint, JsonRoundTrip) {
  auto res = train(tiny_train(heads::HeadKind::kGaussian, 100));
  const std::string text = checkpoint_to_json(res.checkpoint);
  PolicyCheckpoint back = checkpoint_from_json(text);
  EXPECT_EQ(back.policy.flat(), res.checkpoint.policy.flat());
  EXPECT_EQ(back.env.hash_hex(), res.checkpoint.env.hash_hex());
  EXPECT_EQ(checkpoint_to_json(back), text);
  Matrix obs = Matrix::Random(4, 3);
  EXPECT_EQ(back.policy.mode(obs), res.checkpoint.policy.mode(obs));
}

TEST(Distill, BcGradientMatchesFiniteDifferences) {
  Policy teacher = make_policy(heads::HeadKind::kGaussian, 3, 2, 20);
  for (auto kind : {heads::HeadKind::kGaussian, heads::HeadKind::kBernoulli,
                    heads::HeadKind::kCategorical}) {
    Policy student = make_policy(kind, 3, 2, 21);
    Matrix obs = Matrix::Random(16, 3);
    Matrix targets = teacher_targets(teacher, obs, kind);
    student.zero_grad();
    bc_loss(student, obs, targets).backward();
    for (auto t : student.parameters()) {
      Matrix analytic = t.grad();
      EXPECT_LT(max_rel_error(analytic, numeric_grad(t, [&] {
                                return bc_loss(student, obs, targets).item();
                              })),
                1e-4);
    }
  }
}

TEST(Distill, TargetsLieOnStudentSupport) {
  Policy teacher = make_policy(heads::HeadKind::kGaussian, 3, 1, 22);
  Matrix obs = Matrix::Random(50, 3) * 3;
  Matrix tb = teacher_targets(teacher, obs, heads::HeadKind::kBernoulli);
  EXPECT_TRUE((tb.array().abs() == 2.0).all());
  Matrix tc = teacher_targets(teacher, obs, heads::HeadKind::kCategorical);
  EXPECT_TRUE((tc.array() == 0.0 || tc.array().abs() == 2.0).all());
  Matrix tg = teacher_targets(teacher, obs, heads::HeadKind::kGaussian);
  EXPECT_TRUE((tg.array().abs() <= 2.0).all());
}

TEST(Distill, SaturatedTeacherDrivesBernoulliToPositive) {
  Policy teacher = make_policy(heads::HeadKind::kGaussian, 3, 1, 23);
  auto params = teacher.net().parameters();
  for (auto& t : params) t.mutable_value().setZero();
  params.back().mutable_value().setConstant(10.0);
  PolicyConfig sc;
  sc.head = heads::HeadKind::kBernoulli;
  sc.hidden = {16};
  DistillConfig dc;
  dc.budget = 8000;
  dc.horizon = 50;
  dc.num_envs = 2;
  dc.minibatch = 100;
  dc.eval_interval = 1000;
  dc.eval_episodes = 1;
  dc.lr = 1e-2;
  auto res = distill(teacher, sc, pendulum_env(), dc, 4);
  // States the student itself visits.
  EnvPool pool(pendulum_env(), 1, 77);
  Rng rng(24);
  const Matrix obs = collect_rollouts(res.checkpoint.policy, nullptr, pool, 200, rng)[0].obs;
  auto head = std::get<heads::BernoulliHead>(res.checkpoint.policy.head(obs));
  EXPECT_GT(head.probs.value().mean(), 0.95);
  EXPECT_FALSE(res.curve.empty());
}

}  // namespace
}  // namespace bangbang::learn
