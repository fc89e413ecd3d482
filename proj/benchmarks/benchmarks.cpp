#include <benchmark/benchmark.h>

#include "fiberalign/analysis.hpp"
#include "fiberalign/optics.hpp"
#include "fiberalign/plant.hpp"
#include "fiberalign/runner.hpp"
#include "fiberalign/scenario.hpp"

using namespace fiberalign;

namespace {

void BM_ModeOverlapNumeric(benchmark::State& state) {
  GaussianBeam a{1.0, 1.0e-3, 780e-9};
  GaussianBeam b{1.0, 1.4e-3, 780e-9};
  double half = 4.0 * b.waist_radius_m;
  int points = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(mode_overlap_numeric(a, b, half, points));
}
BENCHMARK(BM_ModeOverlapNumeric)->Arg(128)->Arg(256)->Arg(512);

void BM_BenchRead(benchmark::State& state) {
  Bench bench{Bench::Config{}};
  bench.inject_perturbation(1e-4, -0.5e-4);
  for (auto _ : state) benchmark::DoNotOptimize(bench.read());
}
BENCHMARK(BM_BenchRead);

void BM_AlignmentRun(benchmark::State& state) {
  Scenario sc = builtin_scenario("smf_fine");
  std::uint64_t seed = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(run_alignment(sc, seed++));
}
BENCHMARK(BM_AlignmentRun)->Unit(benchmark::kMillisecond);

void BM_FitDecayModel(benchmark::State& state) {
  CouplingModel model{0.8, 1.625e-3, 780e-9};
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 41; ++i) {
    double theta = 3e-4 * i / 40.0;
    pts.push_back({theta, angular_efficiency(model, theta)});
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_decay_model(pts, 1.625e-3, 780e-9));
}
BENCHMARK(BM_FitDecayModel);

}  // namespace

BENCHMARK_MAIN();
