#include <benchmark/benchmark.h>

#include "freqcp/dp_partition.hpp"
#include "freqcp/inference.hpp"
#include "freqcp/synthetic.hpp"

namespace {

using namespace freqcp;

TimeSeries planted_series(int m, int t_count, double delta, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.window_size = m;
  spec.windows = t_count;
  spec.delta = delta;
  spec.t1 = {t_count / 3, t_count / 3, t_count / 3 + 1};
  spec.t2 = {2 * t_count / 3, 2 * t_count / 3, 2 * t_count / 3 + 1};
  Rng rng(seed);
  draw_planted(spec, rng);
  return generate(spec, rng);
}

void BM_Stft(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto x = planted_series(m, 60, 0.5, 1);
  for (auto _ : state) benchmark::DoNotOptimize(stft(x, m));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(x.size()));
}
BENCHMARK(BM_Stft)->Arg(8)->Arg(64)->Arg(512);

void BM_SegmentCostCache(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto f = stft(planted_series(m, 60, 0.5, 2), m);
  for (auto _ : state) benchmark::DoNotOptimize(SegmentCostCache(f));
}
BENCHMARK(BM_SegmentCostCache)->Arg(8)->Arg(512);

void BM_OptimalPartitioning(benchmark::State& state) {
  const int t_count = static_cast<int>(state.range(0));
  const auto f = stft(planted_series(8, t_count, 0.5, 3), 8);
  const SegmentCostCache cache(f);
  const auto pen = bic_penalties(8, 1.0, t_count, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(initial_configuration(cache, pen));
}
BENCHMARK(BM_OptimalPartitioning)->Arg(30)->Arg(60)->Arg(120);

void BM_Detect(benchmark::State& state) {
  const int t_count = static_cast<int>(state.range(0));
  const auto x = planted_series(8, t_count, 0.6, 4);
  DetectConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(detect(x, cfg));
}
BENCHMARK(BM_Detect)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_SelectiveP(benchmark::State& state) {
  const auto x = planted_series(8, 30, 0.6, 5);
  InferenceConfig ic;
  ic.dp_only = false;
  const auto det = detect(x, ic.detect);
  const auto locs = det.config.union_locations();
  if (locs.empty()) {
    state.SkipWithError("no detection in the benchmark series");
    return;
  }
  int replays = 0;
  for (auto _ : state) replays = selective_p(x.samples, det, locs.front(), ic).replays;
  state.counters["replays"] = replays;
}
BENCHMARK(BM_SelectiveP)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
