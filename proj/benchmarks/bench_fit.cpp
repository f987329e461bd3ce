#include "bctx/context_tree.hpp"
#include "bctx/sequential_model.hpp"
#include "bctx/simulate.hpp"

#include <benchmark/benchmark.h>

using namespace bctx;

namespace {

FitConfig ar_config() {
    FitConfig c = FitConfig::defaults(ModelKind::ar);
    c.depth = 10;
    c.order = 2;
    return c;
}

FitConfig arch_config() {
    FitConfig c = FitConfig::defaults(ModelKind::arch);
    c.order = 2;
    return c;
}

void BM_FitAr(benchmark::State& state) {
    const auto x = generate(builtin_spec("sim_1"), static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) {
        auto m = fit_model(ar_config(), x, x.size());
        benchmark::DoNotOptimize(m->log_evidence());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitAr)->Arg(10000)->Arg(20000)->Arg(40000)->Arg(80000)->Complexity(benchmark::oN)
    ->Unit(benchmark::kMillisecond);

void BM_Cctw(benchmark::State& state) {
    const auto x = generate(builtin_spec("sim_1"), static_cast<std::size_t>(state.range(0)), 2);
    const auto m = fit_model(ar_config(), x, x.size());
    ContextTree tree = m->tree();
    for (auto _ : state) benchmark::DoNotOptimize(cctw(tree, m->prior()));
    state.counters["nodes"] = static_cast<double>(tree.size());
}
BENCHMARK(BM_Cctw)->Arg(10000)->Arg(40000)->Unit(benchmark::kMicrosecond);

void BM_ObserveAr(benchmark::State& state) {
    const auto x = generate(builtin_spec("sim_1"), 60000, 3);
    BctAr m(ar_config());
    m.fit(x, 10000);
    std::size_t pos = 10000;
    for (auto _ : state) {
        if (pos == x.size()) {
            state.PauseTiming();
            m = BctAr(ar_config());
            m.fit(x, 10000);
            pos = 10000;
            state.ResumeTiming();
        }
        m.observe(x, pos++);
    }
}
BENCHMARK(BM_ObserveAr)->Unit(benchmark::kMicrosecond);

void BM_FitArch(benchmark::State& state) {
    const auto x = generate(builtin_spec("arch_sim"), static_cast<std::size_t>(state.range(0)), 4);
    for (auto _ : state) {
        auto m = fit_model(arch_config(), x, x.size());
        benchmark::DoNotOptimize(m->log_evidence());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitArch)->Arg(1000)->Arg(2000)->Arg(4000)->Arg(8000)->Complexity(benchmark::oN)
    ->Unit(benchmark::kMillisecond);

void BM_ObserveArch(benchmark::State& state) {
    const auto x = generate(builtin_spec("arch_sim"), 30000, 5);
    BctArch m(arch_config());
    m.fit(x, 5000);
    std::size_t pos = 5000;
    for (auto _ : state) {
        if (pos == x.size()) {
            state.PauseTiming();
            m = BctArch(arch_config());
            m.fit(x, 5000);
            pos = 5000;
            state.ResumeTiming();
        }
        m.observe(x, pos++);
    }
}
BENCHMARK(BM_ObserveArch)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
