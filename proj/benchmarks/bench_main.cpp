#include "cpsem/estimation.hpp"
#include "cpsem/filtering.hpp"
#include "cpsem/lorenz.hpp"
#include "cpsem/models.hpp"
#include "cpsem/smoothing.hpp"

#include <benchmark/benchmark.h>

namespace cpsem {
namespace {

SimulatedData linear_data(int T) {
    const LinearModel model(ThetaLinear::with_stationary_prior(0.9, 1.0, 1.0));
    Rng rng(1);
    return simulate(model, rng, T);
}

void BM_BootstrapFilter(benchmark::State& state) {
    const LinearModel model(ThetaLinear::with_stationary_prior(0.9, 1.0, 1.0));
    const auto data = linear_data(100);
    const int n = static_cast<int>(state.range(0));
    Rng rng(2);
    for (auto _ : state) {
        auto h = run_filter(model, data.observations, FilterVariant::pf(), n, rng);
        benchmark::DoNotOptimize(h.log_evidence());
    }
    state.SetItemsProcessed(state.iterations() * 100 * n);
}
BENCHMARK(BM_BootstrapFilter)->Arg(10)->Arg(100)->Arg(1000);

void BM_BackwardSimulation(benchmark::State& state) {
    const LinearModel model(ThetaLinear::with_stationary_prior(0.9, 1.0, 1.0));
    const auto data = linear_data(100);
    const int n = static_cast<int>(state.range(0));
    Rng rng(3);
    const auto history = run_filter(model, data.observations, FilterVariant::pf(), n, rng);
    BackwardSampler sampler(model, history, BackwardOptions{});
    for (auto _ : state) {
        auto paths = sampler.draw(rng, 10);
        benchmark::DoNotOptimize(paths.data());
    }
}
BENCHMARK(BM_BackwardSimulation)->Arg(10)->Arg(100)->Arg(1000);

void BM_LorenzFlow(benchmark::State& state) {
    StateVector x = lorenz_attractor_point();
    for (auto _ : state) {
        x = lorenz_flow(x, 0.15);
        benchmark::DoNotOptimize(x.data());
    }
}
BENCHMARK(BM_LorenzFlow);

void BM_SemIteration(benchmark::State& state) {
    const auto data = linear_data(100);
    SemConfig cfg;
    cfg.n_f = static_cast<int>(state.range(0));
    cfg.n_s = 10;
    cfg.iters = 1;
    cfg.theta0 = ThetaLinear::with_stationary_prior(0.5, 2.0, 2.0);
    cfg.record_timing = false;
    for (auto _ : state) {
        auto trace = run_sem(data.observations, cfg);
        benchmark::DoNotOptimize(trace.theta);
    }
}
BENCHMARK(BM_SemIteration)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace cpsem

BENCHMARK_MAIN();
