// Selection-step and full-solve timings, factorized versus dense, on the radar
// dictionary with M* = 16 and a sweep over N*.

#include <benchmark/benchmark.h>

#include <random>

#include "fcomp/radar.hpp"
#include "fcomp/solver.hpp"

namespace {

using namespace fcomp;

struct Fixture {
  explicit Fixture(std::size_t n_star)
      : dict(radar::make_dictionary(cfg, n_star, n_star)), dense(dict) {
    std::mt19937_64 rng(42);
    const radar::Scene scene =
        radar::generate_random_scene(5, cfg, radar::default_scene_bounds(cfg), 2.0, rng);
    y = radar::synthesize_measurement(scene, cfg, rng);
  }

  radar::RadarConfig cfg;
  InterpolatedDictionary dict;
  DenseDictionary dense;
  ComplexTensor y;
};

void BM_SelectFactorized(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(select_atom(f.y, f.dict));
}

void BM_SelectDense(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(select_atom(f.y, f.dense));
}

template <Algorithm A>
void BM_Solve(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    switch (A) {
      case Algorithm::Fcomp: benchmark::DoNotOptimize(fcomp::fcomp(f.y, f.dict, 5)); break;
      case Algorithm::Fomp: benchmark::DoNotOptimize(fcomp::fomp(f.y, f.dict, 5)); break;
      case Algorithm::Comp: benchmark::DoNotOptimize(fcomp::comp(f.y, f.dense, 5)); break;
      case Algorithm::Omp: benchmark::DoNotOptimize(fcomp::omp(f.y, f.dense, 5)); break;
    }
  }
}

}  // namespace

BENCHMARK(BM_SelectFactorized)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SelectDense)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Solve<Algorithm::Fcomp>)->RangeMultiplier(2)->Range(16, 64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Solve<Algorithm::Comp>)->RangeMultiplier(2)->Range(16, 64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Solve<Algorithm::Fomp>)->RangeMultiplier(2)->Range(16, 64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Solve<Algorithm::Omp>)->RangeMultiplier(2)->Range(16, 64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
