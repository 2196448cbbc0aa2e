#include "toeplab/operator.hpp"
#include "toeplab/symbol.hpp"

#include <benchmark/benchmark.h>

using namespace toeplab;

namespace {

Symbol two_cos() { return Symbol::from_coefficients({{{1}, 1.0}, {{-1}, 1.0}}, 1); }

void BM_ToeplitzBuild(benchmark::State& state) {
    const Symbol f = two_cos();
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(toeplitz_matrix(f, N));
}
BENCHMARK(BM_ToeplitzBuild)->Arg(256)->Arg(1024);

void BM_CommutatorFormula(benchmark::State& state) {
    const Symbol f = two_cos();
    const Symbol g = derivative(f);
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(commutator_formula_rhs(f, g, N));
}
BENCHMARK(BM_CommutatorFormula)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CriticalSet(benchmark::State& state) {
    const Symbol f = Symbol::from_coefficients({{{1}, 1.0}, {{-1}, 1.0}, {{2}, 0.5}, {{-2}, 0.5}}, 1);
    for (auto _ : state) benchmark::DoNotOptimize(critical_set(f));
}
BENCHMARK(BM_CriticalSet)->Unit(benchmark::kMicrosecond);

}  // namespace
