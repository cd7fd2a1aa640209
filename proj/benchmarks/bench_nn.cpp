#include <benchmark/benchmark.h>

#include "bangbang/learn/policy.hpp"
#include "bangbang/nn/ops.hpp"

namespace {

using namespace bangbang;

learn::Policy make_policy(heads::HeadKind kind) {
  learn::PolicyConfig pc;
  pc.head = kind;
  Rng rng(0);
  return learn::Policy(3, envsim::ActionSpec::uniform(1, 2.0), pc, rng);
}

void BM_PolicySample(benchmark::State& state) {
  auto policy = make_policy(static_cast<heads::HeadKind>(state.range(0)));
  Rng rng(1);
  const learn::Matrix obs = learn::Matrix::Random(state.range(1), 3);
  for (auto _ : state) benchmark::DoNotOptimize(policy.sample(obs, rng));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_LogProbBackward(benchmark::State& state) {
  auto policy = make_policy(static_cast<heads::HeadKind>(state.range(0)));
  Rng rng(1);
  const learn::Matrix obs = learn::Matrix::Random(state.range(1), 3);
  const learn::Matrix actions = policy.sample(obs, rng);
  for (auto _ : state) {
    policy.zero_grad();
    nn::sum(policy.log_prob(obs, actions)).backward();
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

// Head kinds: 0 Gaussian, 1 Bernoulli, 2 Categorical.
BENCHMARK(BM_PolicySample)->ArgsProduct({{0, 1, 2}, {8, 256}});
BENCHMARK(BM_LogProbBackward)->ArgsProduct({{0, 1, 2}, {256}});

}  // namespace
