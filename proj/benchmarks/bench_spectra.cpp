#include "toeplab/spectra.hpp"

#include <benchmark/benchmark.h>

using namespace toeplab;

namespace {

Symbol two_cos() { return Symbol::from_coefficients({{{1}, 1.0}, {{-1}, 1.0}}, 1); }

void BM_EighReal(benchmark::State& state) {
    const auto H = toeplitz_matrix(two_cos(), static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(eigh(H));
}
BENCHMARK(BM_EighReal)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_EighConjugateOperator(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const auto A = conjugate_operator(derivative(two_cos()), Space::half_line(N));
    for (auto _ : state) benchmark::DoNotOptimize(eigh(A));
}
BENCHMARK(BM_EighConjugateOperator)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_LapProbe(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const auto sdH = eigh(toeplitz_matrix(two_cos(), N));
    const auto sdA = eigh(conjugate_operator(derivative(two_cos()), Space::half_line(N)));
    for (auto _ : state) benchmark::DoNotOptimize(lap_probe(sdH, sdA, 0.0, {0.1}));
}
BENCHMARK(BM_LapProbe)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace
