#include <benchmark/benchmark.h>

#include "explab/ars.hpp"
#include "explab/lqr_env.hpp"
#include "explab/numeric.hpp"
#include "explab/online_linreg.hpp"
#include "explab/policy_gradient.hpp"
#include "explab/rng.hpp"

namespace {

using namespace explab;

void BM_SphereSample(benchmark::State& state) {
  RngStream rng(1);
  const auto dim = static_cast<Index>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_unit_sphere(dim, rng));
}
BENCHMARK(BM_SphereSample)->Arg(10)->Arg(100)->Arg(1000);

void BM_BgdRound(benchmark::State& state) {
  const auto d = static_cast<Index>(state.range(0));
  const BoundsConfig bounds = BoundsConfig::from_radii(1.0, 1.0, 1.0);
  RngStream rng(2);
  LinearPredictor pred = LinearPredictor::zeros(d);
  const RealVector x = sample_unit_sphere(d, rng);
  const ScheduleParams sched = theorem_schedule(LearnerKind::kBgd, bounds, d, 1, 100000);
  for (auto _ : state) {
    SquareLossRound oracle(x, 0.3);
    benchmark::DoNotOptimize(bgd_param_step(pred, oracle, sched.learning_rate, sched.delta, rng, bounds));
  }
}
BENCHMARK(BM_BgdRound)->Arg(11)->Arg(101);

void BM_ActionRound(benchmark::State& state) {
  const auto d = static_cast<Index>(state.range(0));
  const BoundsConfig bounds = BoundsConfig::from_radii(1.0, 1.0, 1.0);
  RngStream rng(3);
  LinearPredictor pred = LinearPredictor::zeros(d);
  const RealVector x = sample_unit_sphere(d, rng);
  const ScheduleParams sched = theorem_schedule(LearnerKind::kActionRs, bounds, d, 1, 100000);
  for (auto _ : state) {
    SquareLossRound oracle(x, 0.3);
    benchmark::DoNotOptimize(action_space_step(pred, oracle, sched.learning_rate, sched.delta, rng, bounds));
  }
}
BENCHMARK(BM_ActionRound)->Arg(11)->Arg(101);

void BM_ParamSpaceRlGrad(benchmark::State& state) {
  const auto d = static_cast<Index>(state.range(0));
  const LqrSystem sys = gen_lqr_system(d, 4);
  const RealVector w = RealVector::Zero(d);
  RngStream rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(param_space_rl_grad(sys, w, 1e-2, 20, rng));
}
BENCHMARK(BM_ParamSpaceRlGrad)->Arg(20)->Arg(100);

void BM_ActionSpaceRlGrad(benchmark::State& state) {
  const auto d = static_cast<Index>(state.range(0));
  const LqrSystem sys = gen_lqr_system(d, 4);
  const RealVector w = RealVector::Zero(d);
  RngStream rng(6);
  for (auto _ : state) benchmark::DoNotOptimize(action_space_rl_grad(sys, w, 1e-2, 20, rng));
}
BENCHMARK(BM_ActionSpaceRlGrad)->Arg(20)->Arg(100);

void BM_ArsIterationLqr(benchmark::State& state) {
  const LqrSystem sys = gen_lqr_system(20, 7);
  ArsConfig config;
  config.n_directions = 20;
  config.n_top = 10;
  ArsState ars{RealVector::Zero(20), RunningMoments(20), 0};
  const ArsReward reward = [&](const RealVector& w, const RunningMoments&, RunningMoments*,
                               RngStream&) { return -deterministic_cost(sys, w, 20); };
  RngStream rng(8);
  for (auto _ : state) benchmark::DoNotOptimize(ars_iteration(reward, ars, config, rng));
}
BENCHMARK(BM_ArsIterationLqr);

void BM_SpectralRadius(benchmark::State& state) {
  RngStream rng(9);
  const auto d = static_cast<Index>(state.range(0));
  RealMatrix A(d, d);
  for (Index i = 0; i < A.size(); ++i) A.data()[i] = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(spectral_radius(A));
}
BENCHMARK(BM_SpectralRadius)->Arg(5)->Arg(20)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
