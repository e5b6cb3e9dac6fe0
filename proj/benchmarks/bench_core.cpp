#include "optstop/dp_oracle.hpp"
#include "optstop/solver.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace optstop;

IncrementLaw quarterWalk() {
    return IncrementLaw::lattice(1.0, {{1.0, 0.25}, {-1.0, 0.75}});
}

void BM_ExactReturnKernel(benchmark::State& state) {
    const auto law = quarterWalk();
    for (auto _ : state) {
        auto kernel = exactReturnKernel(law, 0.05);
        benchmark::DoNotOptimize(kernel.weight.data());
    }
}
BENCHMARK(BM_ExactReturnKernel);

void BM_RatioEvaluation(benchmark::State& state) {
    const auto law = quarterWalk();
    const auto f = RewardFunction::powerPlus(1.0);
    const auto kernel = exactReturnKernel(law, 0.0);
    double x = 0.3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ratioFromKernel(kernel, f, x).value);
        x += 1e-9;
    }
}
BENCHMARK(BM_RatioEvaluation);

void BM_FindThresholdExact(benchmark::State& state) {
    const auto law = quarterWalk();
    const auto f = RewardFunction::powerPlus(1.0);
    SolverOptions opts;
    opts.tol = 1e-9;
    for (auto _ : state) {
        benchmark::DoNotOptimize(findThreshold(law, f, 0.0, opts).u);
    }
}
BENCHMARK(BM_FindThresholdExact);

void BM_MonteCarloPaths(benchmark::State& state) {
    const auto law = IncrementLaw::gaussian(-0.5, 1.0);
    const auto f = RewardFunction::indicator(0.0);
    McOptions mc;
    mc.budget = state.range(0);
    mc.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            firstPassageMC(law, f, 0.1, 0.0, 0.0, PassageKind::StrictReturn, mc).value);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloPaths)->Arg(1 << 12)->Arg(1 << 14);

void BM_ValueIterationSweeps(benchmark::State& state) {
    const auto law = quarterWalk();
    const auto f = RewardFunction::powerPlus(1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(valueIteration(law, f, 0.1, -30.0, 30.0).iterations);
    }
}
BENCHMARK(BM_ValueIterationSweeps);

} // namespace
