// Serial chunk loop against the OpenMP kernel. Both produce bit-identical
// summaries; only wall time differs.
#include <benchmark/benchmark.h>

#include <numbers>

#include "conevol/sampling.hpp"

namespace {

conevol::MonteCarloConfig config(std::uint64_t n, int workers) {
  conevol::MonteCarloConfig c;
  c.seed = 1;
  c.total_samples = n;
  c.workers = workers;
  return c;
}

void run(benchmark::State& state, const conevol::Cone& cone, conevol::Execution execution) {
  const auto cfg = config(static_cast<std::uint64_t>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(conevol::run_summary(cone, cfg, {}, execution));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CircularSerial(benchmark::State& s) {
  run(s, conevol::Cone::circular(64, std::numbers::pi / 6), conevol::Execution::Serial);
}
void BM_CircularParallel(benchmark::State& s) {
  run(s, conevol::Cone::circular(64, std::numbers::pi / 6), conevol::Execution::Parallel);
}
void BM_PsdSerial(benchmark::State& s) { run(s, conevol::Cone::psd(6), conevol::Execution::Serial); }
void BM_PsdParallel(benchmark::State& s) { run(s, conevol::Cone::psd(6), conevol::Execution::Parallel); }

}  // namespace

BENCHMARK(BM_CircularSerial)->Args({1 << 17, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CircularParallel)->Args({1 << 17, 1})->Args({1 << 17, 2})->Args({1 << 17, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PsdSerial)->Args({1 << 15, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PsdParallel)->Args({1 << 15, 1})->Args({1 << 15, 2})->Args({1 << 15, 4})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
