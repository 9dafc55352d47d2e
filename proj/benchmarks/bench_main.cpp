#include <benchmark/benchmark.h>

#include "splitmax/analysis.hpp"
#include "splitmax/stepper.hpp"

using namespace splitmax;

namespace {

GridSpec bench_grid(int n) { return GridSpec(Cuboid::unit(), n, n, n); }

NoiseSpec bench_noise() {
  NoiseSpec ns;
  ns.K = 4;
  ns.seed = 9001;
  return ns;
}

void BM_NoiseIncrement(benchmark::State& state) {
  const GridSpec g = bench_grid(int(state.range(0)));
  const NoiseSpec ns = bench_noise();
  const ModeBasis basis(g, ns.K);
  const BrownianLattice lat = BrownianLattice::sample(ns, 0, 0.5, 64);
  int step = 0;
  for (auto _ : state) {
    NoiseIncrement incr = make_increment(lat, basis, ns, 64, step);
    benchmark::DoNotOptimize(incr.w.v.data());
    step = (step + 1) & 63;
  }
}
BENCHMARK(BM_NoiseIncrement)->Arg(8)->Arg(16)->Arg(24);

void BM_SubflowStage(benchmark::State& state) {
  const GridSpec g = bench_grid(int(state.range(0)));
  const NoiseSpec ns = bench_noise();
  const SubflowEngine engine(g);
  const ModeBasis basis(g, ns.K);
  const BrownianLattice lat = BrownianLattice::sample(ns, 0, 0.5, 64);
  const NoiseIncrement incr = make_increment(lat, basis, ns, 64, 0);
  StateZ z = make_preset_state(g, "smooth-bump", 1);
  for (auto _ : state) {
    engine.sub_flow(z, 1, Scheme::Exact, incr.dt, ns, incr.w);
    benchmark::DoNotOptimize(z.f[0].v.data());
  }
}
BENCHMARK(BM_SubflowStage)->Arg(8)->Arg(16)->Arg(24);

void BM_SplitStep(benchmark::State& state) {
  const GridSpec g = bench_grid(int(state.range(0)));
  const NoiseSpec ns = bench_noise();
  const SplitStepper st(g, ns, StepperConfig{});
  const BrownianLattice lat = BrownianLattice::sample(ns, 0, 0.5, 64);
  const NoiseIncrement incr = make_increment(lat, st.basis(), ns, 64, 0);
  StateZ z = make_preset_state(g, "smooth-bump", 1);
  for (auto _ : state) {
    st.one_step(z, incr);
    benchmark::DoNotOptimize(z.f[0].v.data());
  }
}
BENCHMARK(BM_SplitStep)->Arg(8)->Arg(16)->Arg(24)->Arg(32);

void BM_EnergyNorm(benchmark::State& state) {
  const GridSpec g = bench_grid(int(state.range(0)));
  const StateZ z = make_preset_state(g, "smooth-bump", 1);
  for (auto _ : state) {
    const double e = inner_l2(z, z);
    benchmark::DoNotOptimize(e);
  }
}
BENCHMARK(BM_EnergyNorm)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
