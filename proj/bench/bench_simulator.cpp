// Serial reference vs OpenMP kernels on identical configurations.

#include <benchmark/benchmark.h>

#include "dcsim/simulator.hpp"

namespace {

dcsim::RunConfig config(std::int64_t triggers) {
  constexpr std::uint64_t kPoints = 16;
  dcsim::RunConfig cfg;
  cfg.n_triggers = static_cast<std::uint64_t>(triggers);
  cfg.optics.v_eom = 150.0;
  cfg.emission = {.p1 = 0.2, .p2 = 0.001};
  cfg.phase_schedule = dcsim::make_phase_schedule(dcsim::uniform_phases(kPoints), cfg.n_triggers / kPoints);
  cfg.seed = 42;
  return cfg;
}

template <auto Fn>
void run(benchmark::State& state) {
  const auto cfg = config(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EventLogSerial(benchmark::State& s) { run<dcsim::run_experiment_serial>(s); }
void BM_EventLogParallel(benchmark::State& s) { run<dcsim::run_experiment>(s); }
void BM_CountsSerial(benchmark::State& s) { run<dcsim::simulate_counts_serial>(s); }
void BM_CountsParallel(benchmark::State& s) { run<dcsim::simulate_counts>(s); }

BENCHMARK(BM_EventLogSerial)->Arg(1 << 18)->Arg(1 << 21)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EventLogParallel)->Arg(1 << 18)->Arg(1 << 21)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountsSerial)->Arg(1 << 18)->Arg(1 << 21)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountsParallel)->Arg(1 << 18)->Arg(1 << 21)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
