#include <benchmark/benchmark.h>

#include "relhyp/metric_graph.hpp"

namespace {

relhyp::MetricGraph grid(int side) {
  relhyp::MetricGraph g(side * side);
  auto id = [side](int x, int y) { return x * side + y; };
  for (int x = 0; x < side; ++x)
    for (int y = 0; y < side; ++y) {
      if (x + 1 < side) g.add_edge(id(x, y), id(x + 1, y), 1.0);
      if (y + 1 < side) g.add_edge(id(x, y), id(x, y + 1), 1.0);
    }
  return g;
}

void BM_DistanceRow(benchmark::State& state) {
  auto g = grid(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto row = relhyp::single_source_distances(g, 0);
    benchmark::DoNotOptimize(row.back());
  }
}
BENCHMARK(BM_DistanceRow)->Arg(20)->Arg(60);

}  // namespace

BENCHMARK_MAIN();
