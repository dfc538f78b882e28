#include <benchmark/benchmark.h>

#include <random>

#include "playtrack/assignment.hpp"

using namespace playtrack;

namespace {

// Square cost matrix with roughly a tenth of the pairs gated, as after spatial gating.
void BM_SolveAssignment(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> cost(0.0, 1.0);
    CostMatrix m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            m.at(r, c) = cost(rng);
            if (cost(rng) < 0.1) m.gate(r, c);
        }
    }
    for (auto _ : state) benchmark::DoNotOptimize(solve_assignment(m));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveAssignment)->RangeMultiplier(2)->Range(4, 128)->Complexity();

}  // namespace
