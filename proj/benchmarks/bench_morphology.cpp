// bench_morphology.cpp - erosion, dilation, components and Euler characteristic

#include <random>

#include <benchmark/benchmark.h>

#include "callosim/morphology.hpp"
#include "callosim/topology.hpp"

using namespace callosim;

namespace {

BinaryMask random_mask(std::int64_t n, double density) {
  BinaryMask m(Geometry{{n, n, n}, {1, 1, 1}, {}});
  std::mt19937_64 rng(n);
  std::bernoulli_distribution on(density);
  for (auto& v : m.buffer()) v = on(rng);
  return m;
}

BinaryMask ball(std::int64_t n) {
  BinaryMask m(Geometry{{n, n, n}, {1, 1, 1}, {}});
  const double c = double(n - 1) / 2.0, r2 = c * c * 0.6;
  for (std::int64_t k = 0; k < n; ++k)
    for (std::int64_t j = 0; j < n; ++j)
      for (std::int64_t i = 0; i < n; ++i)
        m(i, j, k) = (i - c) * (i - c) + (j - c) * (j - c) + (k - c) * (k - c) <= r2;
  return m;
}

}  // namespace

static void BM_DilateSphere(benchmark::State& state) {
  const auto m = ball(state.range(0));
  const auto se = StructuringElement::sphere(double(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(dilate(m, se));
  state.SetItemsProcessed(state.iterations() * std::int64_t(m.size()));
}
BENCHMARK(BM_DilateSphere)->Args({64, 1})->Args({64, 3})->Args({128, 1})->Unit(benchmark::kMillisecond);

static void BM_ErodeLine(benchmark::State& state) {
  const auto m = ball(state.range(0));
  const auto se = StructuringElement::line(AnatomicalAxis::InferiorSuperior, 3);
  for (auto _ : state) benchmark::DoNotOptimize(erode(m, se));
  state.SetItemsProcessed(state.iterations() * std::int64_t(m.size()));
}
BENCHMARK(BM_ErodeLine)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_Components(benchmark::State& state) {
  const auto m = random_mask(state.range(0), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(count_components(m, Connectivity::Vertices));
  state.SetItemsProcessed(state.iterations() * std::int64_t(m.size()));
}
BENCHMARK(BM_Components)->Arg(32)->Arg(96)->Unit(benchmark::kMillisecond);

static void BM_Euler(benchmark::State& state) {
  const auto m = random_mask(state.range(0), 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(euler_characteristic(m));
  state.SetItemsProcessed(state.iterations() * std::int64_t(m.size()));
}
BENCHMARK(BM_Euler)->Arg(32)->Arg(96)->Unit(benchmark::kMillisecond);

static void BM_Betti(benchmark::State& state) {
  const auto m = random_mask(state.range(0), 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(betti_numbers(m));
}
BENCHMARK(BM_Betti)->Arg(16)->Arg(48)->Unit(benchmark::kMillisecond);
