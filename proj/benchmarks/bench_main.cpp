#include "swarmcov/meanfield.hpp"
#include "swarmcov/pde_oracle.hpp"
#include "swarmcov/sde.hpp"

#include <benchmark/benchmark.h>

#include <memory>

using namespace swarmcov;

namespace {

const BoxDomain kCube(make_point({0, 0, 0}), make_point({100, 100, 100}));

std::shared_ptr<const TargetDensity> balls8() {
  static const auto t = std::make_shared<const TargetDensity>(make_balls8_target(kCube, 0.0));
  return t;
}

void BM_KdeQuery(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const SwarmState s = sample_uniform_state(kCube, n, 1);
  const KdeIndex index(Kernel::euclidean(5.0, 3), kCube, s.positions, n);
  std::size_t j = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(index.density(s.positions[j]));
    j = (j + 1) % n;
  }
}
BENCHMARK(BM_KdeQuery)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_KdeBuild(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const SwarmState s = sample_uniform_state(kCube, n, 1);
  const Kernel k = Kernel::euclidean(5.0, 3);
  for (auto _ : st) {
    const KdeIndex index(k, kCube, s.positions, n);
    benchmark::DoNotOptimize(index.size());
  }
}
BENCHMARK(BM_KdeBuild)->Arg(1000)->Arg(10000);

void BM_RatesBrockett(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const ControlLaw law = ControlLaw::switching(balls8(), 10.0, ReactionFunctions{500.0}, Kernel::euclidean(5.0, 3),
                                               DensitySource::MotionlessOnly, kCube.volume());
  SwarmState s = sample_uniform_state(kCube, n, 2);
  for (std::size_t j = 0; j < n; j += 2) s.states[j] = MotionState::Motionless;
  for (auto _ : st) benchmark::DoNotOptimize(compute_rates(s, law, kCube));
}
BENCHMARK(BM_RatesBrockett)->Arg(1000)->Arg(10000);

void BM_SdeStepBrockett(benchmark::State& st) {
  const ControlLaw law = ControlLaw::constant({0.0, 0.0}, {std::sqrt(10.0), std::sqrt(10.0)});
  const auto family = builtin_brockett();
  SwarmState s = sample_uniform_state(kCube, 1000, 3);
  for (auto _ : st) {
    s = stratonovich_step(std::move(s), law, family, kCube, 0.01, StepContext{1, 4, Integrator::Auto, nullptr});
    ++s.step;
  }
  st.SetItemsProcessed(st.iterations() * 1000);
}
BENCHMARK(BM_SdeStepBrockett);

void BM_SdeStepHeun(benchmark::State& st) {
  const ControlLaw law = ControlLaw::noninteracting(
      std::make_shared<const TargetDensity>(make_balls8_target(kCube, 0.001)), 1.0, kCube.volume());
  const auto family = builtin_brockett();
  SwarmState s = sample_uniform_state(kCube, 1000, 4);
  for (auto _ : st) {
    s = stratonovich_step(std::move(s), law, family, kCube, 0.01, StepContext{1, 4, Integrator::Heun, nullptr});
    ++s.step;
  }
  st.SetItemsProcessed(st.iterations() * 1000);
}
BENCHMARK(BM_SdeStepHeun);

void BM_PdeLinearStep(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const Grid g = Grid::box(BoxDomain(make_point({0, 0}), make_point({1, 1})), {n, n});
  const auto coef = CoefficientPair::laplacian(g);
  const double dt = linear_stability_bound(coef);
  GridField y(g, 1.0);
  for (auto _ : st) y = step_linear(y, coef, dt);
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_PdeLinearStep)->Arg(64)->Arg(256);

void BM_PdeSemilinearStep(benchmark::State& st) {
  const Grid g = Grid::box(BoxDomain(make_point({0}), make_point({1})), {200});
  const auto lap = CoefficientPair::laplacian(g, 0.05);
  const GridField target(g, 1.0);
  TwoStateField s{GridField(g, 0.7), GridField(g, 0.3)};
  for (auto _ : st) s = step_semilinear(s.moving, s.motionless, target, ReactionFunctions{10.0}, 1e-4, lap);
}
BENCHMARK(BM_PdeSemilinearStep);

}  // namespace

BENCHMARK_MAIN();
