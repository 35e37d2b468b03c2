#include <benchmark/benchmark.h>

#include <string>

#include "pqsched/config_io.hpp"
#include "pqsched/engine.hpp"
#include "pqsched/httheory.hpp"

using namespace pqsched;

namespace {

SystemConfig moderation() {
  static const SystemConfig c = load_config(PQSCHED_BENCH_CONFIG);
  return c;
}

void BM_RunPath(benchmark::State& state) {
  const auto c = moderation();
  const auto kind = static_cast<PolicyKind>(state.range(0));
  const auto policy = PolicyRef::make(kind, c);
  std::uint64_t seed = 1;
  std::size_t jobs = 0;
  for (auto _ : state) {
    const auto path = run_path(c, policy, seed++, 11);
    jobs += path.jobs.size();
    benchmark::DoNotOptimize(path.jobs.data());
  }
  state.counters["jobs/s"] = benchmark::Counter(static_cast<double>(jobs), benchmark::Counter::kIsRate);
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_RunPath)
    ->Arg(static_cast<int>(PolicyKind::OracleGcmu))
    ->Arg(static_cast<int>(PolicyKind::NaiveGcmu))
    ->Arg(static_cast<int>(PolicyKind::Pcmu))
    ->Arg(static_cast<int>(PolicyKind::GlobalFcfs))
    ->Unit(benchmark::kMillisecond);

void BM_KktSolve(benchmark::State& state) {
  auto c = moderation();
  if (state.range(0) == 3) {
    for (auto& f : c.costs) f.power = 3.0;
  }
  const auto p = derive_predicted_params(c);
  double r = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kkt_solve(r, p, c.costs).objective);
    r = r > 5.0 ? 0.1 : r * 1.01;
  }
}
BENCHMARK(BM_KktSolve)->Arg(2)->Arg(3);

void BM_BmPaths(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(bm_workload_paths(1.0, static_cast<std::size_t>(state.range(0)), 1.0, 100, 1).size());
  }
}
BENCHMARK(BM_BmPaths)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
