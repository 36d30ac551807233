#include <benchmark/benchmark.h>

#include "hodd/analysis.hpp"
#include "hodd/dynamics.hpp"
#include "hodd/generators.hpp"
#include "hodd/published.hpp"

namespace {

const std::vector<hodd::PauliString>& axes() {
  static const auto a = hodd::weight_one_axes(1);
  return a;
}

void BM_Moments(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto schedule = hodd::published_schedule(k);
  const auto profile = hodd::switching_profile(schedule, axes());
  for (auto _ : state) benchmark::DoNotOptimize(hodd::moments(profile, k));
}
BENCHMARK(BM_Moments)->DenseRange(2, 8, 2);

void BM_ResidualAndJacobian(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto schedule = hodd::published_schedule(k);
  const auto intervals = schedule.intervals();
  std::vector<double> theta(intervals.size());
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = std::log(intervals[i]);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        hodd::residual_vector(intervals, schedule.labels(), schedule.group(), axes(), k));
    benchmark::DoNotOptimize(hodd::residual_jacobian(theta, schedule.labels(), schedule.group(), axes(), k));
  }
}
BENCHMARK(BM_ResidualAndJacobian)->DenseRange(2, 8, 2);

void BM_Evolve(benchmark::State& state) {
  const auto schedule = hodd::published_schedule(static_cast<int>(state.range(0)));
  const auto model = hodd::sample_model(1, 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(hodd::evolve(schedule, model, 0.1).error);
}
BENCHMARK(BM_Evolve)->DenseRange(2, 8, 2);

void BM_ReducedError(benchmark::State& state) {
  const auto schedule = hodd::published_schedule(4);
  const auto model = hodd::sample_model(1, 1e-3);
  const auto states = hodd::haar_product_states(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(hodd::reduced_error(schedule, model, 0.1, states));
}
BENCHMARK(BM_ReducedError)->Arg(100);

void BM_Optimize(benchmark::State& state) {
  hodd::OptimizerConfig config;
  config.order = static_cast<int>(state.range(0));
  config.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(hodd::optimize_schedule(config).result.cost);
}
BENCHMARK(BM_Optimize)->DenseRange(2, 6, 1)->Unit(benchmark::kMillisecond);

void BM_CertificateGrid(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(hodd::grid_search_lower_bound(3, 200).min_max_moment);
}
BENCHMARK(BM_CertificateGrid)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
