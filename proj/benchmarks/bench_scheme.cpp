// Microbenchmarks for the stepper hot paths. Run manually:
//   ./benchmarks/reach_bench [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include "reach/analysis.hpp"
#include "reach/scenario.hpp"

using namespace reach;

namespace {

BuiltScenario linear_at(double h) {
  ScenarioConfig c = builtin_scenario("linear2d");
  c.h = h;
  c.T = 1.0;
  return build_scenario(c);
}

FullState advance_full(const BuiltScenario& s, long steps) {
  FullState st = init_full(s.x0, s.params);
  for (long n = 0; n < steps; ++n)
    st = step_full(st, s.rhs, s.params, static_cast<double>(n) * s.params.h);
  return st;
}

void BM_StepFull(benchmark::State& state) {
  BuiltScenario s = linear_at(0.1);
  FullState st = advance_full(s, state.range(0));
  const double t = static_cast<double>(state.range(0)) * s.params.h;
  for (auto _ : state) {
    FullState next = step_full(st, s.rhs, s.params, t);
    benchmark::DoNotOptimize(next.cells.size());
  }
  state.counters["cells"] = static_cast<double>(st.cells.size());
}
BENCHMARK(BM_StepFull)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_StepBoundary(benchmark::State& state) {
  BuiltScenario s = linear_at(0.1);
  FullState full = advance_full(s, state.range(0));
  Layers layers = extract_layers(full.cells, 0, 1);
  BoundaryState st{layers.layer(0), layers.layer(1), state.range(0)};
  const double t = static_cast<double>(state.range(0)) * s.params.h;
  for (auto _ : state) {
    BoundaryState next = step_boundary(st, s.rhs, s.params, t);
    benchmark::DoNotOptimize(next.boundary.size());
  }
  state.counters["cells"] = static_cast<double>(st.boundary.size());
}
BENCHMARK(BM_StepBoundary)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_ExtractLayers(benchmark::State& state) {
  BuiltScenario s = linear_at(0.1);
  FullState full = advance_full(s, 8);
  for (auto _ : state) {
    Layers layers = extract_layers(full.cells, 0, 1);
    benchmark::DoNotOptimize(layers.layer(0).size());
  }
  state.counters["cells"] = static_cast<double>(full.cells.size());
}
BENCHMARK(BM_ExtractLayers)->Unit(benchmark::kMillisecond);

void BM_Rasterize(benchmark::State& state) {
  ConvexBody body = ConvexBody::from_box(box_at(Vec{0.0, 0.0}, 0.5));
  const double rho = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    GridSet cells = rasterize(body, 0.01, rho);
    benchmark::DoNotOptimize(cells.size());
  }
}
BENCHMARK(BM_Rasterize)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_ConnectedComponents(benchmark::State& state) {
  BuiltScenario s = linear_at(0.1);
  FullState full = advance_full(s, 8);
  Layers layers = extract_layers(full.cells, 0, 1);
  for (auto _ : state) {
    auto comps = connected_components(layers.layer(0));
    benchmark::DoNotOptimize(comps.size());
  }
}
BENCHMARK(BM_ConnectedComponents)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
