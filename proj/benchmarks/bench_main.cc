#include <benchmark/benchmark.h>

#include "test_util.h"
#include "wsnsync/reconciler.h"
#include "wsnsync/rng.h"
#include "wsnsync/scenario.h"
#include "wsnsync/simulator.h"

namespace {

using namespace wsnsync;

void BM_Diff(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  Rng rng(1);
  IdSet local;
  IdSet online;
  for (std::uint64_t id = 1; id <= n; ++id) {
    if (rng.bernoulli(0.99)) local.insert(RecordId{id});
    if (rng.bernoulli(0.93)) online.insert(RecordId{id});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(diff(local, online, RecordId{n}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Diff)->Arg(2364)->Arg(100000)->Arg(1000000);

void BM_StoreInsert(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  std::vector<Packet> packets;
  for (std::uint64_t id = 1; id <= n; ++id) {
    packets.push_back(testing::packet(id, static_cast<std::int64_t>(id * 10)));
  }
  for (auto _ : state) {
    ServerStore store;
    for (const auto& p : packets) store.insert(p);
    benchmark::DoNotOptimize(store.size());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_StoreInsert)->Arg(2364)->Arg(100000);

void BM_ReplayRun(benchmark::State& state) {
  const ScenarioConfig cfg = paper_scenario();
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(cfg).metrics.totals.generated);
  }
}
BENCHMARK(BM_ReplayRun)->Unit(benchmark::kMillisecond);

void BM_ReplayReconcile(benchmark::State& state) {
  const RunResult r = run(paper_scenario());
  for (auto _ : state) {
    ServerStore local = r.local;
    ServerStore online = r.online;
    benchmark::DoNotOptimize(reconcile(local, online, r.metrics.manifest).synchronized);
  }
}
BENCHMARK(BM_ReplayReconcile)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
