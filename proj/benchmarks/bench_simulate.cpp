#include <benchmark/benchmark.h>

#include "epinet/dynamics.hpp"
#include "epinet/network.hpp"
#include "epinet/oracle.hpp"
#include "epinet/theory.hpp"

using namespace epinet;

namespace {

ModelParams pa_params(std::int64_t n, double eta) {
  ModelParams p;
  p.n = n;
  p.kernel = Kernel::preferential_attachment(1.0, 0.7);
  p.eta = eta;
  p.lambda = 0.5;
  return p;
}

void BM_Simulate(benchmark::State& state) {
  const Model m(pa_params(state.range(0), 0.5));
  SimConfig cfg;
  cfg.t_max = 10.0;
  std::uint64_t events = 0;
  for (auto _ : state) {
    cfg.seed = ++events;
    const Trajectory t = simulate(m, all_vertices(m.size()), cfg);
    events += t.events;
    benchmark::DoNotOptimize(t.t_ext);
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Simulate)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_Resample(benchmark::State& state) {
  const Model m(pa_params(state.range(1), 0.0));
  const auto method = state.range(0) == 0 ? ResampleMethod::kNaive : ResampleMethod::kBlocked;
  Rng rng(1);
  NetworkState g = sample_stationary(m, rng);
  for (auto _ : state) {
    const Vertex v = uniform_index<Vertex>(rng, static_cast<Vertex>(m.size()));
    resample_vertex(g, v, m, rng, method);
    benchmark::ClobberMemory();
  }
  state.SetLabel(method == ResampleMethod::kNaive ? "naive" : "blocked");
}
BENCHMARK(BM_Resample)->ArgsProduct({{0, 1}, {1000, 100000}});

void BM_CondS(benchmark::State& state) {
  ModelParams p;
  p.n = state.range(0);
  p.kernel = Kernel::factor(1.0, 0.25);
  p.lambda = 0.01;
  const double D = default_drift_constant(p);
  const auto S = scoring_function(KernelKind::kFactor, 0.25, 0.0, p.lambda, D);
  for (auto _ : state) benchmark::DoNotOptimize(verify_condS(S, p, D, CondSMode::kGlobal).worst_ratio);
}
BENCHMARK(BM_CondS)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_OracleSolve(benchmark::State& state) {
  ModelParams p;
  p.n = state.range(0);
  p.lambda = 0.5;
  for (auto _ : state) {
    const auto sp = build_generator(p);
    benchmark::DoNotOptimize(expected_extinction_time_stationary(sp, (1u << p.n) - 1));
  }
}
BENCHMARK(BM_OracleSolve)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
