#include <benchmark/benchmark.h>

#include "spoofkit/embedding.hpp"
#include "spoofkit/rng.hpp"

namespace {

spoofkit::EmbeddingStore framewise(std::size_t records, std::uint32_t frames, std::uint32_t dim) {
  spoofkit::Rng rng(4);
  spoofkit::EmbeddingStore store(dim);
  for (std::size_t i = 0; i < records; ++i) {
    spoofkit::EmbeddingRecord r{"utt" + std::to_string(i), frames, dim, std::vector<float>(std::size_t(frames) * dim)};
    for (auto& v : r.data) v = static_cast<float>(rng.normal());
    store.add(std::move(r));
  }
  return store;
}

void BM_AveragePool(benchmark::State& state) {
  const auto store = framewise(64, 200, 768);  // 4 s of 50 Hz frames per trial
  for (auto _ : state) benchmark::DoNotOptimize(spoofkit::average_pool(store).size());
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * 64 * 200 * 768 * sizeof(float)));
}
BENCHMARK(BM_AveragePool)->Unit(benchmark::kMillisecond);

void BM_StoreRoundTrip(benchmark::State& state) {
  const auto store = framewise(2000, 1, 768);
  for (auto _ : state) {
    const std::string bytes = spoofkit::encode_store(store);
    benchmark::DoNotOptimize(spoofkit::decode_store(bytes).size());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * spoofkit::encode_store(store).size()));
}
BENCHMARK(BM_StoreRoundTrip)->Unit(benchmark::kMillisecond);

}  // namespace
