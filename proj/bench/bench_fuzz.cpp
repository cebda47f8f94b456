#include <benchmark/benchmark.h>

#include "mquery/harness.hpp"

using namespace mquery;

namespace {

void BM_FuzzSerial(benchmark::State& state) {
    auto rules = rules_for_family("match");
    for (auto _ : state) {
        auto s = fuzz_rules(0, static_cast<std::size_t>(state.range(0)), rules, Mode::Ordered, false);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<long>(rules.size()));
}

void BM_FuzzParallel(benchmark::State& state) {
    auto rules = rules_for_family("match");
    for (auto _ : state) {
        auto s = fuzz_rules(0, static_cast<std::size_t>(state.range(0)), rules, Mode::Ordered, true);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<long>(rules.size()));
}

}  // namespace

BENCHMARK(BM_FuzzSerial)->Arg(200)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FuzzParallel)->Arg(200)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
