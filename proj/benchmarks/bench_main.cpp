// Microbenchmarks for the solver hot paths.

#include "tieq/hjb.hpp"
#include "tieq/lq.hpp"
#include "tieq/mc.hpp"
#include "tieq/merton.hpp"
#include "tieq/model.hpp"
#include "tieq/oracle.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace tieq;

lq::LQModel example21_lq(double sigma) {
    return lq::scalar_lq(
        1.0, 0.0, 1.0, sigma, 0.0, [](double, double) { return 0.0; },
        [](double, double) { return 1.0; }, [](double tau) { return 1.0 + tau; });
}

void BM_RiccatiVolterra(benchmark::State& state) {
    const lq::LQModel md = example21_lq(0.3);
    const TimeGrid grid = TimeGrid::uniform(1.0, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto sol = lq::solve_riccati_volterra(md, grid);
        benchmark::DoNotOptimize(sol.P_diag(0));
    }
}
BENCHMARK(BM_RiccatiVolterra)->Arg(64)->Arg(256);

void BM_PartitionGameLQ(benchmark::State& state) {
    const lq::LQModel md = example21_lq(0.3);
    const TimeGrid fine = TimeGrid::uniform(1.0, 256);
    std::vector<double> nodes;
    const auto np = static_cast<std::size_t>(state.range(0));
    for (std::size_t p = 0; p <= np; ++p) nodes.push_back(fine[p * (256 / np)]);
    const TimeGrid partition{std::move(nodes)};
    for (auto _ : state) {
        auto sol = lq::lq_partition_game(md, partition, fine);
        benchmark::DoNotOptimize(sol.Gamma.back());
    }
}
BENCHMARK(BM_PartitionGameLQ)->Arg(8)->Arg(32);

void BM_MertonFixedPoint(benchmark::State& state) {
    const oracle::MertonParams p = oracle::classical_merton(0.05, 0.10, 0.2, 0.5, 1.0, 0.1);
    const TimeGrid grid = TimeGrid::uniform(1.0, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto eq = merton::solve_merton_equilibrium(p, grid);
        benchmark::DoNotOptimize(eq.z.front());
    }
}
BENCHMARK(BM_MertonFixedPoint)->Arg(100)->Arg(400);

void BM_ClassicalHjb(benchmark::State& state) {
    GeneralModel model = make_lq1d(
        1.0, 0.3, 0.0, [](double, double) { return 1.0; }, [](double, double) { return 0.0; },
        [](double tau) { return 1.0 + tau; });
    hjb::GridSpec grids;
    grids.space = SpatialGrid1D(-3.0, 3.0, static_cast<std::size_t>(state.range(0)));
    grids.time = TimeGrid::uniform(1.0, static_cast<std::size_t>(state.range(0)));
    grids.boundary = hjb::BoundaryRule::Linearity;
    for (auto _ : state) {
        auto sol = hjb::classical_hjb(model, 0.0, grids);
        benchmark::DoNotOptimize(sol.values.front());
    }
}
BENCHMARK(BM_ClassicalHjb)->Arg(64)->Arg(128);

void BM_McPaths(benchmark::State& state) {
    GeneralModel model = make_lq1d(
        1.0, 1.0, 0.0, [](double, double) { return 1.0; }, [](double, double) { return 0.0; },
        [](double) { return 1.0; });
    const oracle::LQExampleParams p{1.0, 1.0, [](double) { return 1.0; }};
    mc::Policy policy = mc::Policy::linear_gain(1, [p](double s, std::span<double> g) {
        g[0] = -oracle::lq_riccati_closed_form(p, 0.0, s);
    });
    mc::SimOptions opts;
    opts.scheme = mc::Scheme::LogEuler;
    for (auto _ : state) {
        auto bundle = mc::simulate_paths(model, policy, 0.0, 1.0,
                                         static_cast<std::size_t>(state.range(0)), 1e-2, 7, opts);
        benchmark::DoNotOptimize(bundle.states.back());
    }
}
BENCHMARK(BM_McPaths)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
