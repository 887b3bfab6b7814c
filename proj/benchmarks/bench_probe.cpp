#include <benchmark/benchmark.h>

#include "spoofkit/probe.hpp"
#include "spoofkit/rng.hpp"

namespace {

spoofkit::DenseMatrix features(std::size_t n, std::size_t d, std::vector<double>& y) {
  spoofkit::Rng rng(2);
  spoofkit::DenseMatrix x(n, d);
  y.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i % 9 == 0 ? 1.0 : 0.0;
    for (std::size_t k = 0; k < d; ++k) x(i, k) = rng.normal() + 0.3 * y[i];
  }
  return x;
}

// Full fit (Adam + L-BFGS polish) at typical SSL feature widths.
void BM_FitProbe(benchmark::State& state) {
  std::vector<double> y;
  const auto x = features(2700, static_cast<std::size_t>(state.range(0)), y);
  const auto cfg = *spoofkit::preset_config("probe");
  for (auto _ : state) benchmark::DoNotOptimize(spoofkit::fit_logistic(x, y, cfg).loss);
}
BENCHMARK(BM_FitProbe)->Arg(16)->Arg(256)->Arg(768)->Unit(benchmark::kMillisecond);

void BM_ObjectiveGradient(benchmark::State& state) {
  std::vector<double> y;
  const auto x = features(27000, static_cast<std::size_t>(state.range(0)), y);
  spoofkit::LogisticObjective obj(x, y, 1e3);
  std::vector<double> theta(obj.parameter_count(), 0.01), grad(theta.size());
  for (auto _ : state) benchmark::DoNotOptimize(obj.value_and_gradient(theta, grad));
}
BENCHMARK(BM_ObjectiveGradient)->Arg(768)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
