// bench_metrics.cpp - overlap and surface-distance metrics on phantom pairs

#include <benchmark/benchmark.h>

#include "callosim/augment.hpp"
#include "callosim/metrics.hpp"
#include "callosim/phantom.hpp"

using namespace callosim;

namespace {

const LabelVolume& small_phantom() {
  static const LabelVolume v = phantom::generate_phantom(phantom::PhantomSpec::small(1));
  return v;
}

}  // namespace

static void BM_GeneralizedDice(benchmark::State& state) {
  const auto& gt = small_phantom();
  const auto pred = augment::cortex_thickening(gt, 1);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::generalized_dice(gt, pred, metrics::all_classes()));
}
BENCHMARK(BM_GeneralizedDice)->Unit(benchmark::kMillisecond);

static void BM_Hd95(benchmark::State& state) {
  const auto& gt = small_phantom();
  const auto pred = augment::cortex_thickening(gt, 1);
  const auto a = extract_mask(gt, Tissue::GM), b = extract_mask(pred, Tissue::GM);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::hd95(a, b));
}
BENCHMARK(BM_Hd95)->Unit(benchmark::kMillisecond);

static void BM_Evaluate(benchmark::State& state) {
  const auto& gt = small_phantom();
  const auto pred = augment::cc_thinning(gt, 2);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::evaluate(gt, pred, metrics::all_classes(), false));
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);
