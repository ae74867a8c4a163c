#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "regionsim/engine.hpp"

namespace {

using namespace regionsim;

struct EngineFixture {
  Topology topo;
  Scenario scenario;
  std::vector<HandoverEvent> events;

  static EngineFixture make(std::uint32_t width, std::uint32_t height) {
    const std::uint32_t n_cells = width * height;
    Scenario sc;
    sc.topology = TopologySpec::grid(width, height);
    sc.mobility = MobilityModel::random_walk(1.0);
    sc.n_ues = std::max<std::uint32_t>(1, n_cells / 10);
    sc.initial_capacities.assign(
        4, std::ceil(static_cast<double>(n_cells) / 4.0 * 1.3));
    sc.agent.k = 1;
    sc.window = 100000;
    sc.seed = 424242;
    sc.record.flow = false;

    Rng topo_rng = Rng::substream(sc.seed, "topology");
    Topology topo = build_topology(sc.topology, topo_rng);
    Rng mob_rng = Rng::substream(sc.seed, "mobility");
    auto events = generate_handovers(sc.mobility, topo, sc.n_ues, 50000, mob_rng);
    return {std::move(topo), std::move(sc), std::move(events)};
  }
};

// Per-event cost of the full pipeline (classify, record, decide, admit) at
// a fixed live-region count; the interesting comparison is across cell
// counts.
void BM_ProcessEvent(benchmark::State& state) {
  const auto width = static_cast<std::uint32_t>(state.range(0));
  const auto height = static_cast<std::uint32_t>(state.range(1));
  static std::map<std::uint64_t, EngineFixture> cache;
  const std::uint64_t key = (std::uint64_t{width} << 32) | height;
  if (!cache.count(key)) cache.emplace(key, EngineFixture::make(width, height));
  EngineFixture& fx = cache.at(key);

  auto engine = std::make_unique<Engine>(fx.topo, fx.scenario);
  std::size_t i = 0;
  for (auto _ : state) {
    engine->process_event(fx.events[i]);
    if (++i == fx.events.size()) i = 0;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ProcessEvent)->Args({25, 10})->Args({50, 50});

void BM_OracleExhaustive(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  Rng rng(7);
  FlowMatrix flow(n);
  for (CellId i = 0; i < n; ++i)
    for (CellId j = 0; j < n; ++j)
      if (i != j && rng.bernoulli(0.5)) flow.add(i, j, 1 + rng.uniform_u32(9));
  for (auto _ : state) {
    auto result = oracle_partition(flow, 2, (n + 1) / 2, OracleMode::Exhaustive);
    benchmark::DoNotOptimize(result.cut);
  }
}
BENCHMARK(BM_OracleExhaustive)->Arg(10)->Arg(12);

void BM_OracleBranchAndBound(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  Rng rng(7);
  FlowMatrix flow(n);
  for (CellId i = 0; i < n; ++i)
    for (CellId j = 0; j < n; ++j)
      if (i != j && rng.bernoulli(0.5)) flow.add(i, j, 1 + rng.uniform_u32(9));
  for (auto _ : state) {
    auto result =
        oracle_partition(flow, 2, (n + 1) / 2, OracleMode::BranchAndBound);
    benchmark::DoNotOptimize(result.cut);
  }
}
BENCHMARK(BM_OracleBranchAndBound)->Arg(12)->Arg(16)->Arg(20);

void BM_RunScenario(benchmark::State& state) {
  Scenario sc;
  sc.topology = TopologySpec::community(2, 12, 2);
  sc.mobility = MobilityModel::community_flow(0.95, 0.5);
  sc.n_ues = 16;
  sc.n_events = static_cast<std::uint64_t>(state.range(0));
  sc.initial_capacities = {15.0, 15.0};
  sc.agent.k = 1;
  sc.window = 500;
  sc.seed = 3;
  for (auto _ : state) {
    RunResult r = run_scenario(sc);
    benchmark::DoNotOptimize(r.s1_inter);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunScenario)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
