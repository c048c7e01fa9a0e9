// Serial versus OpenMP timings of the scan stages on the stressed 118-bus
// case. The worker count is the benchmark argument; 1 is the serial baseline.
#include <benchmark/benchmark.h>

#include "ctsa/cts/pipeline.hpp"
#include "ctsa/grid/case_io.hpp"

using namespace ctsa;

namespace {

const BaseCase& stressed() {
  static const BaseCase base = solve_base_case(load_case_file(CTSA_DATA_DIR "/case118_stressed.m"));
  return base;
}

const std::vector<Contingency>& contingencies() {
  static const auto list = enumerate_contingencies(stressed().network);
  return list;
}

void BM_BaseSolve118(benchmark::State& state) {
  const auto& net = stressed().network;
  for (auto _ : state) benchmark::DoNotOptimize(solve_power_flow(net));
}

void BM_ScreenN1(benchmark::State& state) {
  ScreeningOptions o;
  o.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(assess_contingencies(stressed(), contingencies(), o));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(contingencies().size()));
}

void BM_ScanMethod(benchmark::State& state, Method method) {
  CtsOptions o;
  o.method = method;
  o.workers = static_cast<int>(state.range(0));
  std::size_t tasks = 0;
  for (auto _ : state) {
    auto report = run_scan(stressed(), contingencies(), o);
    tasks = report.timing.task_count;
    benchmark::DoNotOptimize(report);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(tasks));
}

}  // namespace

BENCHMARK(BM_BaseSolve118)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScreenN1)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(BM_ScanMethod, cbce, Method::cbce)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(BM_ScanMethod, ce, Method::ce)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
