// Serial reference loops against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <vector>

#include "lfrg/fixed_points.hpp"
#include "lfrg/potential.hpp"

namespace {

using lfrg::Execution;

void source(benchmark::State& state, const lfrg::Background& bg, Execution exec) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto grid = lfrg::quartic_grid(200.0, n, 1.0, {0.0, 0.01, 0.05});
  std::vector<double> out(n);
  for (auto _ : state) {
    lfrg::evaluate_source(grid.values, grid.spacing(), grid.k, bg, out, exec);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

// thermal nodes each need a quadrature, so this is the expensive case
void BM_SourceThermalSerial(benchmark::State& s) { source(s, lfrg::Thermal{1.0}, Execution::Serial); }
void BM_SourceThermalParallel(benchmark::State& s) { source(s, lfrg::Thermal{1.0}, Execution::Parallel); }
void BM_SourceVacuumSerial(benchmark::State& s) {
  source(s, lfrg::MinkowskiVacuum{4, lfrg::mu::Fixed{1.0}}, Execution::Serial);
}
void BM_SourceVacuumParallel(benchmark::State& s) {
  source(s, lfrg::MinkowskiVacuum{4, lfrg::mu::Fixed{1.0}}, Execution::Parallel);
}

void scan(benchmark::State& state, Execution exec) {
  lfrg::BetaSystem sys(lfrg::system::ThermalHighT{});
  lfrg::GridSpec grid;
  const auto n = static_cast<int>(state.range(0));
  grid.m2 = {-0.8, 1.0, n};
  grid.lambda = {1.0, 40.0, n};
  for (auto _ : state) {
    auto res = lfrg::scan_fixed_points(sys, grid, {}, exec);
    benchmark::DoNotOptimize(res.roots.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

void BM_ScanSerial(benchmark::State& s) { scan(s, Execution::Serial); }
void BM_ScanParallel(benchmark::State& s) { scan(s, Execution::Parallel); }

}  // namespace

BENCHMARK(BM_SourceThermalSerial)->Arg(256)->Arg(1024);
BENCHMARK(BM_SourceThermalParallel)->Arg(256)->Arg(1024);
BENCHMARK(BM_SourceVacuumSerial)->Arg(256)->Arg(4096);
BENCHMARK(BM_SourceVacuumParallel)->Arg(256)->Arg(4096);
BENCHMARK(BM_ScanSerial)->Arg(8)->Arg(16);
BENCHMARK(BM_ScanParallel)->Arg(8)->Arg(16);

BENCHMARK_MAIN();
