#include "varlab/diagnostics.hpp"
#include "varlab/parallel.hpp"
#include "varlab/sinkhorn.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace varlab;

void BM_SimulateBrownian(benchmark::State& state) {
  const TimeGrid grid(200);
  const auto model = models::brownian(1, zero_vec(1));
  const auto paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto e = simulate(model, grid, paths, 1);
    benchmark::DoNotOptimize(e.states_data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(paths * grid.steps()));
}
BENCHMARK(BM_SimulateBrownian)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SimulatePinned(benchmark::State& state) {
  const TimeGrid grid(200);
  Vec x = zero_vec(1);
  Vec y = zero_vec(1);
  y[0] = 1.0;
  const auto model = models::pinned_brownian(x, y);
  for (auto _ : state) {
    auto e = simulate(model, grid, 10000, 2);
    benchmark::DoNotOptimize(e.states_data().data());
  }
}
BENCHMARK(BM_SimulatePinned)->Unit(benchmark::kMillisecond);

void BM_MartingaleTest(benchmark::State& state) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(200),
                          static_cast<std::size_t>(state.range(0)), 3);
  const auto probes = default_probe_steps(e);
  const auto x = sample_process(e, 1, [](const PathPrefix& p) { return Vec(p.current()); }, probes);
  for (auto _ : state) {
    auto r = martingale_test(x, e);
    benchmark::DoNotOptimize(r.max_abs_statistic);
  }
}
BENCHMARK(BM_MartingaleTest)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_ElCertify(benchmark::State& state) {
  Vec x = zero_vec(1);
  Vec y = zero_vec(1);
  y[0] = 1.0;
  const auto e = simulate(models::pinned_brownian(x, y), TimeGrid(200), 10000, 4);
  const auto L = lagrangians::kinetic();
  for (auto _ : state) {
    auto r = el_certify(e, L);
    benchmark::DoNotOptimize(r.max_abs_statistic);
  }
}
BENCHMARK(BM_ElCertify)->Unit(benchmark::kMillisecond);

void BM_VariationalDerivative(benchmark::State& state) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(200), 10000, 6);
  const auto h = materialize(shifts::cosine(Vec::Constant(1, 1.0), 1), e);
  const auto L = lagrangians::kinetic();
  for (auto _ : state) {
    auto d = variational_derivative(e, L, h);
    benchmark::DoNotOptimize(d.fd);
  }
}
BENCHMARK(BM_VariationalDerivative)->Unit(benchmark::kMillisecond);

void BM_Characteristics(benchmark::State& state) {
  const auto e = simulate(models::brownian(2, zero_vec(2)), TimeGrid(200), 10000, 5);
  const auto probes = default_probe_steps(e);
  const auto map = features::quadratic(2, false);
  for (auto _ : state) {
    auto r = check_recorded_characteristics(e, map, probes);
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK(BM_Characteristics)->Unit(benchmark::kMillisecond);

void BM_SinkhornPointToGaussian(benchmark::State& state) {
  BridgeProblem p;
  p.nu0 = marginals::point_mass(p.lattice, 0.0);
  p.nu1 = marginals::gaussian(p.lattice, 0.0, 2.0);
  const TimeGrid grid(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto s = sinkhorn_bridge(p, grid);
    benchmark::DoNotOptimize(s.entropy);
  }
}
BENCHMARK(BM_SinkhornPointToGaussian)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
