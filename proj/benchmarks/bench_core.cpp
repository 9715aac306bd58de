#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "groundrisk/risk.hpp"
#include "groundrisk/synthgen.hpp"
#include "groundrisk/uq.hpp"
#include "groundrisk/util.hpp"

namespace {

using namespace groundrisk;

void BM_CpUpperBound(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::size_t x = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cp_upper_bound(x, n, 0.05));
    x = (x + 1) % (n / 4 + 1);
  }
}
BENCHMARK(BM_CpUpperBound)->Arg(20)->Arg(200)->Arg(2000);

void BM_CalibrateThreshold(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::vector<double> u(n);
  std::vector<std::uint8_t> err(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = rng.uniform01();
    err[i] = rng.bernoulli(0.3 * u[i]) ? 1 : 0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(calibrate_threshold(u, err, {0.1, 0.05}));
  state.SetComplexityN(static_cast<std::int64_t>(n));
}
BENCHMARK(BM_CalibrateThreshold)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_ScoreRecord(benchmark::State& state) {
  SynthConfig config;
  config.n_records = 256;
  config.k_samples = static_cast<int>(state.range(0));
  const auto records = generate_dataset(config);
  UqConfig uq;
  uq.k_samples = config.k_samples;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_record(records[i], uq));
    i = (i + 1) % records.size();
  }
}
BENCHMARK(BM_ScoreRecord)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
