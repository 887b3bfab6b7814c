#include <benchmark/benchmark.h>

#include "spoofkit/metrics.hpp"
#include "spoofkit/rng.hpp"

namespace {

void BM_Eer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  spoofkit::Rng rng(1);
  std::vector<double> bona(n / 9), spoof(n - n / 9);
  for (auto& v : bona) v = rng.normal() + 2.0;
  for (auto& v : spoof) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(spoofkit::eer(bona, spoof));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_Eer)->RangeMultiplier(10)->Range(1000, 1000000)->Unit(benchmark::kMicrosecond);

}  // namespace
