#include <benchmark/benchmark.h>

#include "cctsens/cct.hpp"
#include "cctsens/sensitivity.hpp"
#include "cctsens/smib.hpp"

using namespace cctsens;

namespace {

StagedScenario base_scenario() {
    StagedScenario sc;
    sc.params = ParameterSet{};
    sc.model = smib_model(sc.params);
    return sc;
}

} // namespace

static void BM_FindSep(benchmark::State& state) {
    const auto sc = base_scenario();
    for (auto _ : state) {
        auto sep = find_sep(*sc.model, Stage::PreFault, sc.params, sc.sep_guess());
        benchmark::DoNotOptimize(sep);
    }
}
BENCHMARK(BM_FindSep);

static void BM_FaultOnWithShadow(benchmark::State& state) {
    const auto sc = base_scenario();
    for (auto _ : state) {
        auto res = integrate_fault_with_shadow(sc, sc.params, sc.settings.t_max,
                                               sc.settings.h);
        benchmark::DoNotOptimize(res);
    }
}
BENCHMARK(BM_FaultOnWithShadow);

static void BM_CctEvent(benchmark::State& state) {
    const auto sc = base_scenario();
    for (auto _ : state) {
        auto cct = find_cct_event(sc, sc.params);
        benchmark::DoNotOptimize(cct);
    }
}
BENCHMARK(BM_CctEvent);

static void BM_CctBisection(benchmark::State& state) {
    const auto sc = base_scenario();
    for (auto _ : state) {
        auto cct = find_cct_bisection(sc, sc.params, 0.0, 5.0, 1e-6);
        benchmark::DoNotOptimize(cct);
    }
}
BENCHMARK(BM_CctBisection);

static void BM_SensitivityPipeline(benchmark::State& state) {
    const auto sc = base_scenario();
    const auto cct = find_cct_event(sc, sc.params);
    const int idx = ParameterSet::index_of("E");
    for (auto _ : state) {
        auto b = cct_sensitivity(sc, sc.params, idx, cct);
        benchmark::DoNotOptimize(b);
    }
}
BENCHMARK(BM_SensitivityPipeline);

static void BM_LeftNullVector(benchmark::State& state) {
    Matrix a(4, 4, {1, 2, 3, 4, 2, 4, 6, 8, 0.5, 1, 0, 1, 3, 0, 1, 0});
    for (auto _ : state) {
        auto r = left_null_vector(a, 1e-6);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_LeftNullVector);

BENCHMARK_MAIN();
