#include <benchmark/benchmark.h>

#include "tcomplete/completion.hpp"
#include "tcomplete/experiments.hpp"
#include "tcomplete/spectral_init.hpp"

namespace {

using namespace tcomplete;

struct Problem {
  GroundTruth truth;
  ObservationSet obs;
  TripleFrame init;
  double mu0;
};

Problem make_problem(Index d, Index r, double alpha) {
  GroundTruth truth = generate_odeco(d, r, 1);
  ObservationSet obs = sample_uniform(truth.tensor, sample_size(d, r, alpha), 2);
  const double mu0 = std::max(1.0, truth.max_coherence());
  TripleFrame init = initialize(obs, {r, r, r}, mu0);
  return {std::move(truth), std::move(obs), std::move(init), mu0};
}

void BM_SecondMomentEstimate(benchmark::State& state) {
  const Problem p = make_problem(state.range(0), 2, 8.0);
  for (auto _ : state) benchmark::DoNotOptimize(second_moment_estimate(p.obs, 1));
  state.SetItemsProcessed(state.iterations() * p.obs.size());
}
BENCHMARK(BM_SecondMomentEstimate)->Arg(30)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SolveCore(benchmark::State& state) {
  const Index r = state.range(1);
  const Problem p = make_problem(state.range(0), r, 8.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_core(p.init, p.obs));
  state.SetItemsProcessed(state.iterations() * p.obs.size());
}
BENCHMARK(BM_SolveCore)->Args({50, 2})->Args({50, 5})->Unit(benchmark::kMicrosecond);

void BM_RiemannianGradient(benchmark::State& state) {
  const Index r = state.range(1);
  const Problem p = make_problem(state.range(0), r, 8.0);
  const CoreTensor core = solve_core(p.init, p.obs);
  for (auto _ : state) benchmark::DoNotOptimize(riemannian_gradient(p.init, core, p.obs, p.mu0, 1.0));
}
BENCHMARK(BM_RiemannianGradient)->Args({50, 2})->Args({50, 5})->Unit(benchmark::kMicrosecond);

void BM_GogIterations(benchmark::State& state) {
  const Problem p = make_problem(state.range(0), 2, 8.0);
  GoGConfig config{.mu0 = p.mu0, .max_iterations = 10};
  for (auto _ : state) benchmark::DoNotOptimize(gog_run(p.obs, {2, 2, 2}, config, p.init));
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_GogIterations)->Arg(30)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
