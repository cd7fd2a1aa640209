#include <benchmark/benchmark.h>

#include "bangbang/oracle/value_iteration.hpp"

namespace {

using namespace bangbang;

void BM_BuildPendulumMdp(benchmark::State& state) {
  oracle::PendulumGridSpec spec;
  spec.n_theta = spec.n_theta_dot = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(oracle::build_pendulum_mdp(spec));
}

void BM_ValueIteration(benchmark::State& state) {
  oracle::PendulumGridSpec spec;
  spec.n_theta = spec.n_theta_dot = static_cast<int>(state.range(0));
  const auto mdp = oracle::build_pendulum_mdp(spec);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::value_iteration(mdp, 1e-6, 10000));
}

BENCHMARK(BM_BuildPendulumMdp)->Arg(51)->Arg(201)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ValueIteration)->Arg(51)->Unit(benchmark::kMillisecond);

}  // namespace
