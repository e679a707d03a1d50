// bench_pipeline.cpp - phantom generation, augmentation plans and synthesis

#include <benchmark/benchmark.h>

#include "callosim/augment.hpp"
#include "callosim/phantom.hpp"
#include "callosim/random.hpp"
#include "callosim/resample.hpp"
#include "callosim/synthesis.hpp"

using namespace callosim;

namespace {

const LabelVolume& small_phantom() {
  static const LabelVolume v = phantom::generate_phantom(phantom::PhantomSpec::small(1));
  return v;
}

}  // namespace

static void BM_PhantomSmall(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(phantom::generate_phantom(phantom::PhantomSpec::small(2)));
}
BENCHMARK(BM_PhantomSmall)->Unit(benchmark::kMillisecond);

static void BM_Conform(benchmark::State& state) {
  const auto& ph = small_phantom();
  for (auto _ : state) benchmark::DoNotOptimize(conform(ph, {0.5, 0.5, 0.5}, {256, 256, 256}));
}
BENCHMARK(BM_Conform)->Unit(benchmark::kMillisecond);

static void BM_SamplePlan(benchmark::State& state) {
  const augment::AugmentationConfig cfg;
  std::uint64_t s = 0;
  for (auto _ : state) benchmark::DoNotOptimize(augment::sample_plan(cfg, derive_seed(1, s++)));
}
BENCHMARK(BM_SamplePlan);

static void BM_Kink(benchmark::State& state) {
  const auto& ph = small_phantom();
  for (auto _ : state) benchmark::DoNotOptimize(augment::cc_kink(ph, 2.0, 1.0, 0.5));
}
BENCHMARK(BM_Kink)->Unit(benchmark::kMillisecond);

static void BM_Ventriculomegaly(benchmark::State& state) {
  const auto& ph = small_phantom();
  for (auto _ : state) {
    benchmark::DoNotOptimize(augment::ventriculomegaly(ph, 3.0, 8.0, augment::Laterality::Bilateral));
  }
}
BENCHMARK(BM_Ventriculomegaly)->Unit(benchmark::kMillisecond);

static void BM_Synthesize(benchmark::State& state) {
  const auto& ph = small_phantom();
  const synth::SynthConfig cfg;
  const int workers = int(state.range(0));
  std::uint64_t s = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synth::synthesize(ph, cfg, s++, workers));
  state.SetItemsProcessed(state.iterations() * std::int64_t(ph.size()));
}
BENCHMARK(BM_Synthesize)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
