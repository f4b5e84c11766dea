// Parallel path kernel vs the serial reference, plus the swaption path kernel.

#include <benchmark/benchmark.h>

#include "cirdiff/pricing.hpp"
#include "cirdiff/simulation.hpp"

namespace {

const cirdiff::DiffModel kModel{{0.578626, 0.291551, 0.118155, 0.268914}, {0.59774, 0.262334, 0.0864925, 0.280095}};

cirdiff::SimConfig config(std::size_t paths) {
    cirdiff::SimConfig c;
    c.horizon = 5.0;
    c.paths = paths;
    c.seed = 1;
    c.record_stride = 256;
    return c;
}

void BM_SimulateParallel(benchmark::State& state) {
    const auto c = config(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(cirdiff::simulate(kModel, c));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 1280);
}

void BM_SimulateSerial(benchmark::State& state) {
    const auto c = config(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(cirdiff::simulate_reference(kModel, c));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 1280);
}

void BM_SwaptionPathValues(benchmark::State& state) {
    const auto p = cirdiff::simulate(kModel, config(static_cast<std::size_t>(state.range(0))));
    cirdiff::SwaptionSpec s;
    s.maturity = 5.0;
    s.tenor = 10.0;
    for (auto _ : state) benchmark::DoNotOptimize(cirdiff::swaption_path_values(p, s));
}

}  // namespace

BENCHMARK(BM_SimulateParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SwaptionPathValues)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
