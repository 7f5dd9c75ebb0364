#include <benchmark/benchmark.h>

#include "bandtrack/models.hpp"
#include "bandtrack/riccati.hpp"
#include "bandtrack/rng.hpp"
#include "bandtrack/tracker.hpp"

using namespace bandtrack;

static void BM_CounterNormal(benchmark::State& state) {
    const CounterRng rng(7, 3);
    std::uint64_t c = 0;
    for (auto _ : state) benchmark::DoNotOptimize(rng.normal(c++));
}
BENCHMARK(BM_CounterNormal);

static void BM_CounterNormalInversion(benchmark::State& state) {
    const CounterRng rng(7, 3);
    std::uint64_t c = 0;
    for (auto _ : state) benchmark::DoNotOptimize(rng.normal_by_inversion(c++));
}
BENCHMARK(BM_CounterNormalInversion);

static void BM_Reflect(benchmark::State& state) {
    const CounterRng rng(1, 0);
    BandReflector band(0.1);
    band.start(0.0);
    double theta = 0.0;
    std::uint64_t c = 0;
    for (auto _ : state) {
        theta += 0.01 * rng.normal(c++);
        benchmark::DoNotOptimize(band.reflect(theta));
    }
}
BENCHMARK(BM_Reflect);

static void BM_RiccatiSolve(benchmark::State& state) {
    KimOmbergModel m;
    const auto steps = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(riccati_solve(m, steps));
}
BENCHMARK(BM_RiccatiSolve)->Arg(1000)->Arg(10000);

template <bool KimOmberg>
static void BM_StepperPath(benchmark::State& state) {
    const TimeGrid grid(1.0, 10000);
    TargetSpec target;
    MarketModel model = ConstantModel{};
    if constexpr (KimOmberg) {
        target.kind = TargetKind::kim_omberg;
        model = KimOmbergModel{};
    }
    const ScenarioSimulator sim(model, target, Measure::physical, grid);
    std::uint64_t path = 0;
    for (auto _ : state) {
        auto st = sim.stepper(SeedSpec{11, path++});
        for (std::size_t k = 0; k < grid.n_steps(); ++k) st.advance();
        benchmark::DoNotOptimize(st.price()[0]);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.n_steps()));
}
BENCHMARK(BM_StepperPath<false>)->Name("BM_StepperPath/brownian");
BENCHMARK(BM_StepperPath<true>)->Name("BM_StepperPath/kim_omberg");
BENCHMARK_MAIN();
