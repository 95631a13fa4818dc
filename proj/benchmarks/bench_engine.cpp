// Hot-path benchmarks: tree construction, DP expectation against the
// recursion oracle, lattice evaluation, and the three solvers.
#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "gcalc/bsde.hpp"
#include "gcalc/expectation.hpp"
#include "gcalc/fbsde.hpp"
#include "gcalc/lattice.hpp"
#include "gcalc/sde.hpp"
#include "gcalc/tree.hpp"

using namespace gcalc;

namespace {

const VolatilityBand kBand{0.5, 1.0};

ScenarioTree bench_tree(int steps) {
    return build_tree(TimeGrid::uniform(1.0, steps), kBand);
}

CylinderFunctional squared_terminal(const ScenarioTree& tree) {
    return CylinderFunctional::of_coordinate(
        tree.steps(), [](double v) { return v * v; }, GrowthBound{1.0, 1});
}

void BM_BuildTree(benchmark::State& state) {
    const int steps = static_cast<int>(state.range(0));
    for (auto _ : state) {
        const ScenarioTree tree = bench_tree(steps);
        benchmark::DoNotOptimize(tree.total_nodes());
    }
}
BENCHMARK(BM_BuildTree)->Arg(6)->Arg(8);

void BM_Expect(benchmark::State& state) {
    const ScenarioTree tree = bench_tree(static_cast<int>(state.range(0)));
    const auto x = squared_terminal(tree);
    for (auto _ : state) benchmark::DoNotOptimize(expect(tree, x));
}
BENCHMARK(BM_Expect)->Arg(6)->Arg(8);

void BM_BruteForce(benchmark::State& state) {
    const ScenarioTree tree = bench_tree(static_cast<int>(state.range(0)));
    const auto x = squared_terminal(tree);
    for (auto _ : state) benchmark::DoNotOptimize(brute_force_expect(tree, x));
}
BENCHMARK(BM_BruteForce)->Arg(6)->Arg(8);

void BM_Lattice(benchmark::State& state) {
    const LatticeSpec spec{TimeGrid::uniform(1.0, static_cast<int>(state.range(0))), kBand,
                           nullptr};
    const auto payoff = [](double s) { return std::max(s, 0.0); };
    for (auto _ : state) benchmark::DoNotOptimize(lattice_expect(spec, payoff));
}
BENCHMARK(BM_Lattice)->Arg(200)->Arg(400);

void BM_SolveForward(benchmark::State& state) {
    const ScenarioTree tree = bench_tree(static_cast<int>(state.range(0)));
    Regularity reg;
    reg.lipschitz = 1.0;
    const auto coeffs = ForwardCoefficients::scalar(
        [](double, double x) { return 0.3 * x; }, [](double, double) { return 0.1; },
        [](double, double x) { return std::cos(x) + 2.0; }, reg);
    const std::vector<double> x0{0.1};
    for (auto _ : state) {
        const NodeProcess x = solve_forward(tree, coeffs, x0);
        benchmark::DoNotOptimize(x.at(0, 0));
    }
}
BENCHMARK(BM_SolveForward)->Arg(6)->Arg(8);

void BM_SolveBackward(benchmark::State& state) {
    const ScenarioTree tree = bench_tree(static_cast<int>(state.range(0)));
    const auto drivers = BackwardDrivers::scalar(
        [](double, double y) { return std::sin(y); },
        [](double, double y) { return 0.25 * std::cos(y); }, 1.0, 0.25);
    const auto terminal = TerminalData::from_functional(CylinderFunctional::of_coordinate(
        tree.steps(), [](double v) { return std::abs(v); }, GrowthBound{1.0, 0}));
    for (auto _ : state) {
        const NodeProcess y = solve_backward(tree, drivers, terminal);
        benchmark::DoNotOptimize(y.at(0, 0));
    }
}
BENCHMARK(BM_SolveBackward)->Arg(6)->Arg(8);

void BM_FbsdePicard(benchmark::State& state) {
    const ScenarioTree tree = bench_tree(static_cast<int>(state.range(0)));
    FbsdeData data;
    data.x0 = 0.5;
    data.xi = TerminalData::from_functional(CylinderFunctional::of_coordinate(
        tree.steps(), [](double v) { return v; }, GrowthBound{1.0, 0}));
    data.b = [](double, double, double y) { return 0.1 * y; };
    data.h = [](double, double, double) { return 0.0; };
    data.sigma = [](double, double, double) { return 0.0; };
    data.f = [](double, double x, double) { return 0.1 * x; };
    data.g = [](double, double, double) { return 0.0; };
    data.lipschitz_k = 0.1;
    for (auto _ : state) {
        const FbsdeResult result = solve_fbsde(tree, data);
        benchmark::DoNotOptimize(result.pair.y.at(0, 0));
    }
}
BENCHMARK(BM_FbsdePicard)->Arg(4)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
