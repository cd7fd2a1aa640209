#include <benchmark/benchmark.h>

#include <vector>

#include "bangbang/envsim/factory.hpp"

namespace {

using namespace bangbang;

void step_env(benchmark::State& state, envsim::EnvId id) {
  envsim::EnvConfig cfg;
  cfg.env_id = id;
  auto env = envsim::make_environment(cfg, 1);
  const std::vector<double> a(env->action_spec().dim, 0.5);
  env->reset();
  for (auto _ : state) {
    auto r = env->step(a);
    if (r.done) env->reset();
    benchmark::DoNotOptimize(r.reward);
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_PendulumStep(benchmark::State& s) { step_env(s, envsim::EnvId::kPendulum); }
void BM_CartpoleStep(benchmark::State& s) { step_env(s, envsim::EnvId::kCartpole); }
void BM_PointmassStep(benchmark::State& s) { step_env(s, envsim::EnvId::kPointmass); }

BENCHMARK(BM_PendulumStep);
BENCHMARK(BM_CartpoleStep);
BENCHMARK(BM_PointmassStep);

}  // namespace

BENCHMARK_MAIN();
