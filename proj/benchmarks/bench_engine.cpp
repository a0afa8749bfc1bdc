// Throughput of the hot training paths: composite loss gradients on the
// Burgers-sized network and the squared-residual input gradients PACMANN
// consumes.

#include <benchmark/benchmark.h>

#include "pinn/diff_engine.hpp"
#include "pinn/pacmann.hpp"
#include "pinn/pde.hpp"
#include "pinn/samplers.hpp"
#include "pinn/trainer.hpp"

using namespace pinn;

namespace {

struct BurgersSetup {
  PDEProblem problem = make_burgers();
  MLPField field{problem.default_net};
  ParameterVector theta = init_glorot(problem.default_net, 1);
  CollocationSet points = hammersley(2500, problem.box);
};

BurgersSetup& setup() {
  static BurgersSetup instance;
  return instance;
}

}  // namespace

static void BM_LossGradient(benchmark::State& state) {
  auto& s = setup();
  Rng bc_rng = Rng::derive(1, "bench-bc");
  Rng ic_rng = Rng::derive(1, "bench-ic");
  PinnLoss loss(s.problem, s.field, LossWeights{}, s.problem.boundary.sample(80, bc_rng),
                s.problem.initial->sample(160, ic_rng), {}, {});
  loss.set_collocation(s.points.points);
  std::vector<double> grad(s.theta.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss.value_and_gradient(s.theta, grad).total);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.points.size()));
}
BENCHMARK(BM_LossGradient)->Unit(benchmark::kMillisecond);

static void BM_SqResidualInputGradient(benchmark::State& state) {
  auto& s = setup();
  SqResidualGradient grads(s.problem.residual, s.field);
  for (auto _ : state) {
    benchmark::DoNotOptimize(grads.eval(s.points.points, s.theta, {}).size());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.points.size()));
}
BENCHMARK(BM_SqResidualInputGradient)->Unit(benchmark::kMillisecond);

static void BM_PacmannEvent(benchmark::State& state) {
  auto& s = setup();
  PacmannConfig cfg;
  cfg.optimizer = PointOptimizerKind::adam;
  cfg.stepsize = 1e-5;
  cfg.num_steps = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pacmann_move(s.points, s.problem, s.field, s.theta, cfg, 3).size());
  }
}
BENCHMARK(BM_PacmannEvent)->Arg(5)->Arg(15)->Unit(benchmark::kMillisecond);

static void BM_EvalJet2Batch(benchmark::State& state) {
  auto& s = setup();
  JetBatch batch;
  const JetLayout layout = JetLayout::second_order(2);
  for (auto _ : state) {
    s.field.eval_jets(layout, s.points.points, s.theta, batch);
    benchmark::DoNotOptimize(batch.value(0, 0));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.points.size()));
}
BENCHMARK(BM_EvalJet2Batch)->Unit(benchmark::kMillisecond);
