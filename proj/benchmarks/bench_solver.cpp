#include <benchmark/benchmark.h>

#include "tvmap/bootstrap.hpp"
#include "tvmap/lattice.hpp"
#include "tvmap/model.hpp"
#include "tvmap/qut.hpp"
#include "tvmap/rng.hpp"
#include "tvmap/simulate.hpp"
#include "tvmap/tvsolve.hpp"

using namespace tvmap;

namespace {

Dataset bench_dataset(int n, int N, int t) {
    Scenario sc;
    sc.profile = ProfileName::lake;
    sc.N0 = 50;
    sc.n0 = std::max(2 * n, 200);
    sc.T = 2880;
    sc.n = n;
    sc.N = N;
    sc.t = t;
    sc.target_prevalence = 0.80;
    sc.signal_spread = 0.45;
    sc.seed = 1234;
    return simulate_scenario_dataset(sc, 0);
}

} // namespace

static void BM_lambda_zero(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const Dataset ds = bench_dataset(200, N, 96);
    const auto D = build_difference_operator(build_neighbor_graph(ds.lattice));
    for (auto _ : state) {
        benchmark::DoNotOptimize(lambda_zero(ds.X, ds.y, D).lambda0);
    }
}
BENCHMARK(BM_lambda_zero)->Arg(10)->Arg(20)->Arg(30);

static void BM_fit_tv_at_qut(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const Dataset ds = bench_dataset(200, N, 96);
    const auto D = build_difference_operator(build_neighbor_graph(ds.lattice));
    const double beta0 = fit_intercept(ds.X, ds.y);
    const double lambda = qut_estimate(ds.X, D, 0.05, 50, 7, beta0).lambda_qut;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_tv(ds.X, ds.y, D, lambda).objective);
    }
}
BENCHMARK(BM_fit_tv_at_qut)->Arg(10)->Arg(20)->Arg(30);

static void BM_fit_tv_below_threshold(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const Dataset ds = bench_dataset(200, N, 96);
    const auto D = build_difference_operator(build_neighbor_graph(ds.lattice));
    const double lam0 = lambda_zero(ds.X, ds.y, D).lambda0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_tv(ds.X, ds.y, D, 0.5 * lam0).objective);
    }
}
BENCHMARK(BM_fit_tv_below_threshold)->Arg(10)->Arg(20);
