// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.
#include "adl/estimators.hpp"
#include "adl/galerkin.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

namespace {

adl::EnsembleConfig ensemble(std::size_t replicas)
{
    adl::EnsembleConfig c;
    c.spec.model = adl::DoubleWell::make(1.0, 1.0, 0.5);
    c.spec.params = adl::DynamicsParams::normalized(1.0, 1.0, 1.0);
    c.steps = adl::StepConfig{2e-3, 2000, 1};
    c.observables = adl::parse_observables({"q", "q^2"}, 1.0);
    c.replicas = replicas;
    c.seed = 1;
    return c;
}

std::vector<adl::galerkin::GridPoint> grid()
{
    std::vector<adl::galerkin::GridPoint> g;
    for (double gamma : {0.1, 1.0, 10.0})
        for (double eps : {0.3, 3.0})
            g.push_back({gamma, eps});
    return g;
}

void BM_EnsembleSerial(benchmark::State& state)
{
    const auto cfg = ensemble(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(adl::reference::replica_ensemble(cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 2000);
}

void BM_EnsembleOpenMP(benchmark::State& state)
{
    const auto cfg = ensemble(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(adl::replica_ensemble(cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 2000);
    state.counters["threads"] = omp_get_max_threads();
}

void BM_GapSweepSerial(benchmark::State& state)
{
    const auto g = grid();
    for (auto _ : state)
        benchmark::DoNotOptimize(adl::galerkin::reference::spectral_gap_sweep(static_cast<int>(state.range(0)), 1.0, g));
}

void BM_GapSweepOpenMP(benchmark::State& state)
{
    const auto g = grid();
    for (auto _ : state)
        benchmark::DoNotOptimize(adl::galerkin::spectral_gap_sweep(static_cast<int>(state.range(0)), 1.0, g));
    state.counters["threads"] = omp_get_max_threads();
}

} // namespace

BENCHMARK(BM_EnsembleSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleOpenMP)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GapSweepSerial)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GapSweepOpenMP)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
