#include <benchmark/benchmark.h>

#include "pinn/references.hpp"
#include "pinn/samplers.hpp"

using namespace pinn;

static void BM_Hammersley(benchmark::State& state) {
  const DomainBox box{{-1.0, 0.0}, {1.0, 1.0}};
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hammersley(n, box).size());
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Hammersley)->Arg(2500)->Arg(10000);

static void BM_RadSelect(benchmark::State& state) {
  const int pool = 25000;
  std::vector<double> residuals(pool);
  Rng rng(5);
  for (double& r : residuals) r = rng.uniform();
  for (auto _ : state)
    benchmark::DoNotOptimize(rad_select(2500, residuals, 1.0, 1.0, 7).size());
  state.SetItemsProcessed(state.iterations() * pool);
}
BENCHMARK(BM_RadSelect)->Unit(benchmark::kMillisecond);

static void BM_ColeHopfReference(benchmark::State& state) {
  const ColeHopfBurgers reference(0.01 / 3.141592653589793);
  double x = -1.0;
  for (auto _ : state) {
    x = x >= 1.0 ? -1.0 : x + 0.01;
    benchmark::DoNotOptimize(reference.value(x, 0.5));
  }
}
BENCHMARK(BM_ColeHopfReference);

static void BM_AllenCahnTable(benchmark::State& state) {
  for (auto _ : state) {
    state.PauseTiming();
    state.ResumeTiming();
    benchmark::DoNotOptimize(AllenCahnTable(0.001, 512).value(0.3, 0.7));
  }
}
BENCHMARK(BM_AllenCahnTable)->Unit(benchmark::kMillisecond)->Iterations(3);
