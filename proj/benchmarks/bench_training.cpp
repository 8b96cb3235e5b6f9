#include "cinn/autodiff.hpp"
#include "cinn/experiment.hpp"
#include "cinn/network.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace cinn;

// Forward + backward of a 2-20x8-1 network on the scalar reference tape.
void BM_ScalarTapeGradient(benchmark::State& state) {
  const ParamSet net = glorot_init(mlp_dims(2, 8, 20, 1), 1);
  ad::Tape tape;
  for (auto _ : state) {
    tape.reset();
    TapedParams p = bind(tape, net);
    const ad::Var in[2] = {ad::Var::constant(tape, 0.3), ad::Var::constant(tape, 0.1)};
    const ad::Var out = forward<ad::Var>(p, in)[0];
    benchmark::DoNotOptimize(tape.backward(out.id()));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ScalarTapeGradient);

// One full-batch loss + gradient evaluation of the forward-advection arms.
void BM_ObjectiveGradient(benchmark::State& state, const char* experiment, int arm) {
  const ExperimentConfig cfg = builtin_experiment(experiment).arms[static_cast<std::size_t>(arm)];
  auto obj = make_objective(cfg, 1);
  ad::MatrixTape tape;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_objective(*obj, tape).total);
  state.SetLabel(cfg.label);
}
BENCHMARK_CAPTURE(BM_ObjectiveGradient, forward_nn, "forward-advection", 0)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_ObjectiveGradient, forward_pinn, "forward-advection", 1)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_ObjectiveGradient, forward_cinn, "forward-advection", 2)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_ObjectiveGradient, periodic_cinn_v20, "periodic-advection", 0)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ObjectiveGradient, periodic_pinn_v20, "periodic-advection", 4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
