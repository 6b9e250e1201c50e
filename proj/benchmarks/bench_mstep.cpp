#include <benchmark/benchmark.h>

#include "graphem/em.hpp"
#include "graphem/model.hpp"

namespace {

struct Problem {
  graphem::Dataset ds;
  graphem::KnownParameters known;
  graphem::EStepStats stats;
  graphem::Matrix a0;
};

Problem make_problem(const char* name) {
  Problem p{graphem::make_dataset(graphem::dataset_preset(name, 1)), {}, {}, {}};
  p.known = graphem::KnownParameters::from_model(p.ds.model);
  p.a0 = graphem::default_initializer(p.known.state_dim());
  p.stats = graphem::estep_at(p.ds.trajectory.observations, p.known, p.a0);
  return p;
}

// range(0) is gamma / K in hundredths
void BM_GraphemMStep(benchmark::State& state) {
  const auto p = make_problem("A");
  const double gamma = p.stats.seq_length * state.range(0) / 100.0;
  graphem::DrConfig dr;
  dr.tolerance = 1e-8;
  int inner = 0;
  for (auto _ : state) {
    auto res = graphem::graphem_mstep(p.stats, p.known.Q, gamma, p.a0, dr);
    inner = res.iters;
    benchmark::DoNotOptimize(res);
  }
  state.counters["dr_iters"] = inner;
}
BENCHMARK(BM_GraphemMStep)->Arg(3)->Arg(30)->Arg(300)->Unit(benchmark::kMicrosecond);

void BM_MlemMStep(benchmark::State& state) {
  const auto p = make_problem("A");
  for (auto _ : state) {
    auto a = graphem::mlem_mstep(p.stats);
    benchmark::DoNotOptimize(a);
  }
}
BENCHMARK(BM_MlemMStep);

void BM_GraphemFit(benchmark::State& state) {
  const auto p = make_problem("A");
  graphem::GraphemConfig config;
  config.gamma = 0.3 * p.stats.seq_length;
  for (auto _ : state) {
    auto fit = graphem::graphem_fit(p.ds.trajectory.observations, p.known, config);
    benchmark::DoNotOptimize(fit);
  }
}
BENCHMARK(BM_GraphemFit)->Unit(benchmark::kMillisecond);

}  // namespace
