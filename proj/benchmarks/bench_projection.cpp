#include <benchmark/benchmark.h>

#include "spoofkit/projection.hpp"
#include "spoofkit/rng.hpp"

namespace {

spoofkit::DenseMatrix points(std::size_t n, std::size_t d) {
  spoofkit::Rng rng(3);
  spoofkit::DenseMatrix x(n, d);
  for (auto& v : x.data) v = rng.normal();
  return x;
}

void BM_JointAffinities(benchmark::State& state) {
  const auto x = points(static_cast<std::size_t>(state.range(0)), 64);
  for (auto _ : state) benchmark::DoNotOptimize(spoofkit::joint_affinities(x, 30.0).data.data());
}
BENCHMARK(BM_JointAffinities)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

// 100 gradient iterations; a full default run is 10x this.
void BM_Tsne100(benchmark::State& state) {
  const auto x = points(static_cast<std::size_t>(state.range(0)), 64);
  spoofkit::TsneConfig cfg;
  cfg.iterations = 100;
  cfg.kl_every = 0;
  for (auto _ : state) benchmark::DoNotOptimize(spoofkit::tsne(x, cfg).coordinates.data.data());
}
BENCHMARK(BM_Tsne100)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
