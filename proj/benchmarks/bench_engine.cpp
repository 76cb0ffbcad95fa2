#include <benchmark/benchmark.h>

#include "otamm/otamm.hpp"

using namespace otamm;

namespace {

const OtaMacromodel& reference() {
  static const OtaMacromodel m = calibrate_reference(CalibrationTargets{});
  return m;
}

void BM_AcResponse(benchmark::State& st) {
  const auto sys = assemble_descriptor(reference(), LoadCondition(1e-9), false);
  const auto grid = default_grid();
  for (auto _ : st) benchmark::DoNotOptimize(ac_response(sys, grid));
  st.SetItemsProcessed(st.iterations() * grid.size());
}
BENCHMARK(BM_AcResponse);

void BM_PolesZeros(benchmark::State& st) {
  const auto sys = assemble_descriptor(reference(), LoadCondition(1e-9), false);
  for (auto _ : st) benchmark::DoNotOptimize(poles_zeros(sys));
}
BENCHMARK(BM_PolesZeros);

void BM_StabilityExact(benchmark::State& st) {
  const auto sys = assemble_descriptor(reference(), LoadCondition(1e-9), false);
  for (auto _ : st) benchmark::DoNotOptimize(stability_metrics_exact(sys));
}
BENCHMARK(BM_StabilityExact);

void BM_LoadRangeExact(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(load_range_exact(reference(), 0.5, 45.0));
}
BENCHMARK(BM_LoadRangeExact)->Unit(benchmark::kMillisecond);

void BM_LinearStep(benchmark::State& st) {
  const auto sys = assemble_descriptor(reference(), LoadCondition(1e-9), true);
  for (auto _ : st) benchmark::DoNotOptimize(linear_step(sys, 0.025, 50e-6));
}
BENCHMARK(BM_LinearStep)->Unit(benchmark::kMillisecond);

void BM_SlewLimitedStep(benchmark::State& st) {
  const auto c = calibrate_currents(reference());
  for (auto _ : st)
    benchmark::DoNotOptimize(slew_limited_step(reference(), c, LoadCondition(1e-9), 0.3, 50e-6));
}
BENCHMARK(BM_SlewLimitedStep)->Unit(benchmark::kMillisecond);

void BM_MonteCarloSampling(benchmark::State& st) {
  for (auto _ : st)
    benchmark::DoNotOptimize(sample_models(reference(), SigmaSpec{}, 10000, 1, st.range(0)));
}
BENCHMARK(BM_MonteCarloSampling)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
