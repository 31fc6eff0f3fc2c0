// Serial reference against the OpenMP kernels: the seed ensemble and the
// Jacobian finite-difference probes. Arg is the thread count.

#include <benchmark/benchmark.h>

#include "hardball/experiments.hpp"
#include "hardball/lyapunov.hpp"
#include "hardball/neutral.hpp"

using namespace hardball;

namespace {

RunConfig survey_config() {
  return config_from_text("n_balls = 3\nmasses = random\nradius = 0.1\nsegment_length = 20\nensemble_size = 32\n");
}

OrbitSegment probe_segment() {
  SystemParams p;
  p.n_balls = 3;
  p.dim = 2;
  p.torus_side = 1.0;
  p.radius = 0.1;
  p.masses = sample_masses(3, 0.5, 2.0, 4);
  const auto x = state_cast<Extended>(sample_initial_state(p, 4));
  return segment_cast<double>(simulate<Extended>(p, x, StopCondition{15, std::nullopt}));
}

void BM_EnsembleSerial(benchmark::State& state) {
  const auto c = survey_config();
  const auto seeds = ensemble_seeds(c);
  for (auto _ : state) {
    auto rows = ensemble_serial(seeds, [&](std::uint64_t s) { return survey_member(c, s); });
    benchmark::DoNotOptimize(rows);
  }
}

void BM_EnsembleParallel(benchmark::State& state) {
  const auto c = survey_config();
  const auto seeds = ensemble_seeds(c);
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto rows = ensemble_parallel(seeds, [&](std::uint64_t s) { return survey_member(c, s); }, jobs);
    benchmark::DoNotOptimize(rows);
  }
}

void BM_JacobianProbes(benchmark::State& state) {
  const auto seg = probe_segment();
  JacobianOptions opt;
  opt.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(neutral_jacobian<Extended>(seg, opt));
}

void BM_Simulate(benchmark::State& state) {
  SystemParams p;
  p.n_balls = static_cast<int>(state.range(0));
  p.dim = 2;
  p.torus_side = 1.0;
  p.radius = p.n_balls == 2 ? 0.15 : 0.05;
  p.masses.assign(p.n_balls, 1.0);
  const auto s = sample_initial_state(p, 1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate<double>(p, s, StopCondition{10000, std::nullopt}));
  state.SetItemsProcessed(state.iterations() * 10000);
}

void BM_Lyapunov(benchmark::State& state) {
  SystemParams p;
  p.n_balls = 2;
  p.dim = 2;
  p.torus_side = 1.0;
  p.radius = 0.15;
  p.masses = {1.0, 1.0};
  const auto s = sample_initial_state(p, 1);
  for (auto _ : state) benchmark::DoNotOptimize(lyapunov_spectrum(p, s, 1000.0));
}

}  // namespace

BENCHMARK(BM_EnsembleSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JacobianProbes)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Simulate)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Lyapunov)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
