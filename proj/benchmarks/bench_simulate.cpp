#include <benchmark/benchmark.h>

#include "tvmap/rng.hpp"
#include "tvmap/simulate.hpp"

using namespace tvmap;

static void BM_walk(benchmark::State& state) {
    const ProfileMap lake = make_profile(ProfileName::lake, 50, 0.0, 1.0);
    const bool biased = state.range(0) != 0;
    Rng rng(99);
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_walk(lake, 2880, biased, rng).back());
    }
    state.SetItemsProcessed(state.iterations() * 2880);
}
BENCHMARK(BM_walk)->Arg(0)->Arg(1);

static void BM_population(benchmark::State& state) {
    const ProfileMap lake = make_profile(ProfileName::lake, 50, 0.0, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_population(lake, 500, 2880, 3).loc.back());
    }
}
BENCHMARK(BM_population);

static void BM_subsample(benchmark::State& state) {
    const ProfileMap lake = make_profile(ProfileName::lake, 50, 0.0, 1.0);
    PopulationData pop = simulate_population(lake, 1000, 2880, 3);
    generate_infections(pop, lake, 0.8, 4, 0.45);
    for (auto _ : state) {
        benchmark::DoNotOptimize(subsample_dataset(pop, 500, 30, 96, 5).X.sum());
    }
}
BENCHMARK(BM_subsample);
