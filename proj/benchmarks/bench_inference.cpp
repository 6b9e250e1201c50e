#include <benchmark/benchmark.h>

#include "graphem/em.hpp"
#include "graphem/estep.hpp"
#include "graphem/inference.hpp"
#include "graphem/model.hpp"

namespace {

graphem::Dataset preset(const char* name) {
  return graphem::make_dataset(graphem::dataset_preset(name, 1));
}

void BM_KalmanFilter(benchmark::State& state) {
  const auto ds = preset(state.range(0) == 9 ? "A" : "C");
  for (auto _ : state) {
    auto pass = graphem::kalman_filter(ds.model, ds.trajectory.observations);
    benchmark::DoNotOptimize(pass);
  }
  state.SetItemsProcessed(state.iterations() * ds.trajectory.length());
}
BENCHMARK(BM_KalmanFilter)->Arg(9)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_FilterSmoother(benchmark::State& state) {
  const auto ds = preset(state.range(0) == 9 ? "A" : "C");
  for (auto _ : state) {
    const auto filter = graphem::kalman_filter(ds.model, ds.trajectory.observations);
    auto smoother = graphem::rts_smoother(ds.model, filter);
    benchmark::DoNotOptimize(smoother);
  }
  state.SetItemsProcessed(state.iterations() * ds.trajectory.length());
}
BENCHMARK(BM_FilterSmoother)->Arg(9)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_EStep(benchmark::State& state) {
  const auto ds = preset(state.range(0) == 9 ? "A" : "C");
  const auto known = graphem::KnownParameters::from_model(ds.model);
  const graphem::Matrix a0 = graphem::default_initializer(known.state_dim());
  for (auto _ : state) {
    auto stats = graphem::estep_at(ds.trajectory.observations, known, a0);
    benchmark::DoNotOptimize(stats);
  }
}
BENCHMARK(BM_EStep)->Arg(9)->Arg(16)->Unit(benchmark::kMicrosecond);

}  // namespace
