#include <benchmark/benchmark.h>

#include <mlforge/metrics/metrics_store.hpp>

using namespace mlforge;

namespace {

void fill(metrics::MetricsStore& store, std::int64_t steps) {
    store.open_session("kim/mnist/1");
    for (std::int64_t s = 1; s <= steps; ++s) {
        store.log({"kim/mnist/1", s, "acc", 1.0 - 1.0 / (1.0 + 0.1 * static_cast<double>(s)), from_millis(s * 1000)});
        store.log({"kim/mnist/1", s, "loss", 1.0 / (1.0 + 0.1 * static_cast<double>(s)), from_millis(s * 1000)});
    }
}

void BM_Log(benchmark::State& state) {
    metrics::MetricsStore store;
    store.open_session("kim/mnist/1");
    std::int64_t step = 0;
    for (auto _ : state) {
        ++step;
        store.log({"kim/mnist/1", step, "loss", 1.0 / static_cast<double>(step), from_millis(step)});
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Log);

void BM_QueryTail(benchmark::State& state) {
    metrics::MetricsStore store;
    fill(store, state.range(0));
    metrics::QueryOptions q;
    q.name = "loss";
    q.tail = 10;
    for (auto _ : state) {
        benchmark::DoNotOptimize(store.query("kim/mnist/1", q));
    }
}
BENCHMARK(BM_QueryTail)->Arg(1000)->Arg(100000);

void BM_QueryRange(benchmark::State& state) {
    metrics::MetricsStore store;
    fill(store, state.range(0));
    metrics::QueryOptions q;
    q.from_step = state.range(0) / 2;
    q.to_step = state.range(0) / 2 + 100;
    for (auto _ : state) {
        benchmark::DoNotOptimize(store.query("kim/mnist/1", q));
    }
}
BENCHMARK(BM_QueryRange)->Arg(1000)->Arg(100000);

void BM_ExportCsv(benchmark::State& state) {
    metrics::MetricsStore store;
    fill(store, state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(store.export_csv({"kim/mnist/1"}, "loss"));
    }
}
BENCHMARK(BM_ExportCsv)->Arg(1000)->Unit(benchmark::kMicrosecond);

} // namespace
