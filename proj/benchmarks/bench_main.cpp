#include <benchmark/benchmark.h>

#include "vmp/scaling.hpp"

using namespace vmp;

namespace {

void BM_DrawVertex(benchmark::State& state) {
  std::int64_t x = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(draw_vertex(keyed_uniform(7, x, x + 1), 0.2, 0.05));
    ++x;
  }
}
BENCHMARK(BM_DrawVertex);

void BM_BuildAndReduce(benchmark::State& state) {
  const auto T = state.range(0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const LazyNet net(Window{-T - 1, T + 1, 0, T}, 0.3, 0.01, seed++, Orientation::Backward);
    const RootedDag dag = build_dag(net, Vertex{T % 2 == 0 ? 1 : 0, T});
    benchmark::DoNotOptimize(reduce(dag).size());
  }
}
BENCHMARK(BM_BuildAndReduce)->Arg(16)->Arg(64)->Arg(256);

void BM_DualSample(benchmark::State& state) {
  const VmpParams p = potts_params(1.0, 3);
  const std::vector<QueryPoint> pts{{1, state.range(0)}, {5, state.range(0)}};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(dual_sample(pts, p, seed++));
}
BENCHMARK(BM_DualSample)->Arg(8)->Arg(64);

void BM_ForwardSample(benchmark::State& state) {
  const VmpParams p = potts_params(1.0, 3);
  const std::vector<QueryPoint> pts{{1, state.range(0)}, {5, state.range(0)}};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(forward_sample(pts, p, seed++));
}
BENCHMARK(BM_ForwardSample)->Arg(8)->Arg(64);

void BM_ExactDualLaw(benchmark::State& state) {
  const VmpParams p = potts_params(1.0, 3);
  const std::vector<QueryPoint> pts{{1, 2}, {3, 2}};
  for (auto _ : state) benchmark::DoNotOptimize(exact_dual_law(pts, p));
}
BENCHMARK(BM_ExactDualLaw);

void BM_InterfaceSlice(benchmark::State& state) {
  const double eps = std::ldexp(1.0, -static_cast<int>(state.range(0)));
  const VmpParams p = ScalingSchedule::dyadic(static_cast<int>(state.range(0)),
                                              static_cast<int>(state.range(0)), 1.5, 3.0,
                                              ColoringRule{BoundaryTable::uniform(3),
                                                           ColorDistribution::uniform(3),
                                                           ColorDistribution::uniform(3)})
                          .level(0);
  const std::int64_t t = snap(0.0, 0.5, eps).t;
  const auto hi = static_cast<std::int64_t>(1.0 / eps);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const LazyNet net(slice_window(-1, hi + 1, t), p.b, p.kappa, seed++, Orientation::Backward);
    const ColorSlice s = dual_slice(net, p.noise, t, -1, hi + 1);
    benchmark::DoNotOptimize(interface_census(s, 0, hi, eps).count());
  }
}
BENCHMARK(BM_InterfaceSlice)->Arg(3)->Arg(5);

}  // namespace
BENCHMARK_MAIN();
