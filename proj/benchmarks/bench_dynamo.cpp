#include "toeplab/dynamo.hpp"

#include <benchmark/benchmark.h>

using namespace toeplab;

namespace {

void BM_PropagationTrace(benchmark::State& state) {
    const Symbol f = Symbol::from_coefficients({{{1}, 1.0}, {{-1}, 1.0}}, 1);
    const int N = static_cast<int>(state.range(0));
    const Space box = Space::lattice(1, N);
    const auto H = laurent_matrix(f, N);
    const auto sd = eigh(H);
    Vector phi = Vector::Zero(box.dim());
    phi[box.index_of({0})] = 1.0;
    const auto times = linspace(0.0, 0.3 * N, 101);
    for (auto _ : state) benchmark::DoNotOptimize(propagation_trace(f, sd, H, phi, times));
}
BENCHMARK(BM_PropagationTrace)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Evolve(benchmark::State& state) {
    const Symbol f = Symbol::from_coefficients({{{1}, 1.0}, {{-1}, 1.0}}, 1);
    const int N = static_cast<int>(state.range(0));
    const auto sd = eigh(toeplitz_matrix(f, N));
    Vector phi = Vector::Zero(N);
    phi[0] = 1.0;
    const auto times = linspace(0.0, 100.0, 201);
    for (auto _ : state) benchmark::DoNotOptimize(evolve(sd, phi, times));
}
BENCHMARK(BM_Evolve)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace
