#include <benchmark/benchmark.h>

#include <cmath>

#include "swcrt/cox.hpp"
#include "swcrt/harness.hpp"
#include "swcrt/power.hpp"

using namespace swcrt;

namespace {

PowerRequest cath() {
  PowerRequest r;
  r.scenario.design = build_balanced_design(6, 20, 35);
  r.scenario.hazard = {solve_lambda0(0.05, 1), 0.05, 0.4};
  r.scenario.corr = CorrelationSpec::kendall(0.1, 0.05);
  r.beta1 = 0.4;
  return r;
}

void BM_PowerAllMethods(benchmark::State& st) {
  PowerRequest r = cath();
  r.quad.order = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(compute_power(r).tang);
}
BENCHMARK(BM_PowerAllMethods)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_SampleSize(benchmark::State& st) {
  const PowerRequest r = cath();
  for (auto _ : st) benchmark::DoNotOptimize(solve_clusters(r, 0.8).counts.size());
}
BENCHMARK(BM_SampleSize)->Unit(benchmark::kMillisecond);

void BM_GenerateTrial(benchmark::State& st) {
  const TrialDesign d = build_balanced_design(3, 30, static_cast<int>(st.range(0)));
  const HazardSpec h{std::log(5.0), 0.2, 0.4};
  const auto corr = CorrelationSpec::kendall(0.05, 0.01);
  std::uint64_t rep = 0;
  for (auto _ : st)
    benchmark::DoNotOptimize(generate_trial(d, h, {1.0}, corr, 1, rep++).records.size());
  st.SetItemsProcessed(st.iterations() * 90 * st.range(0));
}
BENCHMARK(BM_GenerateTrial)->Arg(50)->Arg(200);

void BM_FitCox(benchmark::State& st) {
  const TrialDesign d = build_balanced_design(3, 30, static_cast<int>(st.range(0)));
  const TrialDataset data = generate_trial(d, {std::log(5.0), 0.2, 0.4}, {1.0},
                                           CorrelationSpec::kendall(0.05, 0.01), 1, 0);
  for (auto _ : st) benchmark::DoNotOptimize(fit_cox(data).beta_hat);
  st.SetItemsProcessed(st.iterations() * static_cast<long>(data.records.size()));
}
BENCHMARK(BM_FitCox)->Arg(50)->Arg(200);

void BM_HarnessReplicates(benchmark::State& st) {
  SimConfig c;
  c.replicates = 50;
  c.predict = false;
  c.threads = 1;
  for (auto _ : st) benchmark::DoNotOptimize(run_study(c).used);
}
BENCHMARK(BM_HarnessReplicates)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
