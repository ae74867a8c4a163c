#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "regionsim/engine.hpp"
#include "regionsim/rng.hpp"

using namespace regionsim;

namespace {

Topology build(const TopologySpec& spec, std::uint64_t seed = 1) {
  Rng rng = Rng::substream(seed, "topology");
  return build_topology(spec, rng);
}

RegionDirectory directory_for(const std::vector<double>& caps) {
  RegionDirectory dir;
  for (double c : caps) dir.create_region(c);
  return dir;
}

// Two directly linked cells pinned to distinct regions; the canonical
// hand-traceable fixture.
Scenario two_cell_scenario() {
  Scenario sc;
  sc.topology =
      TopologySpec::explicit_graph(2, {{0, 1, true}});
  sc.mobility = MobilityModel::random_walk(1.0);
  sc.n_ues = 1;
  sc.n_events = 0;
  sc.initial_capacities = {3.0, 3.0};
  sc.init_policy = InitPolicy::Pinned;
  sc.pinned_assignment = {0, 1};
  sc.agent.k = 1;
  sc.agent.gamma = 1.0;
  sc.agent.epsilon = 0.0;
  sc.agent.refresh_interval = 1000;
  sc.delta = 0.05;
  sc.window = 500;
  sc.seed = 7;
  return sc;
}

void check_assignment_invariants(const Engine& eng, std::uint32_t k) {
  const auto& asg = eng.assignment();
  const auto& dir = eng.directory();
  std::map<RegionId, double> member_load;
  for (CellId c = 0; c < asg.cell_count(); ++c) {
    const auto& regions = asg.regions_of(c);
    REQUIRE(regions.size() == k);
    CHECK(std::is_sorted(regions.begin(), regions.end()));
    for (RegionId r : regions) {
      CHECK(dir.is_live(r));
      member_load[r] += 1.0;
    }
    RegionId primary = asg.primary_of(c);
    CHECK(std::binary_search(regions.begin(), regions.end(), primary));
  }
  // Region-side bookkeeping mirrors the cell-side view exactly.
  for (const auto& [region, cap] : dir.live()) {
    (void)cap;
    const MmeAgent& mme = eng.mme_agent(region);
    CHECK(mme.load() == doctest::Approx(member_load[region]));
    for (const auto& [cell, load] : mme.assigned()) {
      (void)load;
      CHECK(asg.is_member(cell, region));
    }
  }
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("random deal gives every cell k live regions within capacity") {
  Topology topo = build(TopologySpec::grid(4, 3));
  auto dir = directory_for({8, 8, 8, 8});
  for (std::uint32_t k : {1u, 2u}) {
    Rng rng(11);
    AssignmentState asg = init_assignment(InitPolicy::Random, topo, dir, k, rng);
    std::map<RegionId, int> count;
    for (CellId c = 0; c < 12; ++c) {
      REQUIRE(asg.regions_of(c).size() == k);
      for (RegionId r : asg.regions_of(c)) ++count[r];
    }
    for (const auto& [r, n] : count) {
      CHECK(r < 4);
      CHECK(n <= 8);
    }
  }
}

TEST_CASE("random deal is a function of the rng stream") {
  Topology topo = build(TopologySpec::grid(4, 3));
  auto dir = directory_for({6, 6});
  Rng r1(3), r2(3), r3(4);
  auto a = init_assignment(InitPolicy::Random, topo, dir, 1, r1);
  auto b = init_assignment(InitPolicy::Random, topo, dir, 1, r2);
  auto c = init_assignment(InitPolicy::Random, topo, dir, 1, r3);
  CHECK(a.primary_vector() == b.primary_vector());
  CHECK(a.primary_vector() != c.primary_vector());
}

TEST_CASE("pinned deal reproduces the given vector") {
  Topology topo = build(TopologySpec::grid(2, 2));
  auto dir = directory_for({2, 2});
  Rng rng(1);
  auto asg = init_assignment(InitPolicy::Pinned, topo, dir, 1, rng,
                             {1, 0, 0, 1});
  CHECK(asg.primary_vector() == std::vector<RegionId>{1, 0, 0, 1});
}

TEST_CASE("geographic deal matches the baseline partition") {
  Topology topo = build(TopologySpec::explicit_graph(
      4, {{0, 1, {}}, {1, 2, {}}, {2, 3, {}}}));
  auto dir = directory_for({2, 2});
  Rng rng(1);
  auto asg = init_assignment(InitPolicy::Static, topo, dir, 1, rng);
  CHECK(asg.primary_vector() == std::vector<RegionId>{0, 0, 1, 1});
}

TEST_CASE("neighbor majority yields a full valid assignment") {
  Topology topo = build(TopologySpec::grid(4, 4));
  auto dir = directory_for({8, 8, 8});
  Rng rng(5);
  auto asg =
      init_assignment(InitPolicy::NeighborMajority, topo, dir, 1, rng);
  std::map<RegionId, int> count;
  for (CellId c = 0; c < 16; ++c) ++count[asg.primary_of(c)];
  int total = 0;
  for (const auto& [r, n] : count) {
    CHECK(r < 3);
    CHECK(n <= 8);
    total += n;
  }
  CHECK(total == 16);
}

TEST_CASE("deal refuses capacities that cannot hold every cell") {
  Topology topo = build(TopologySpec::grid(3, 3));
  auto dir = directory_for({4, 4});
  Rng rng(1);
  try {
    (void)init_assignment(InitPolicy::Random, topo, dir, 1, rng);
    FAIL("expected throw");
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::InsufficientCapacity);
  }
}

TEST_CASE("repeated one-way traffic pulls the target cell across") {
  Scenario sc = two_cell_scenario();
  Topology topo = build(sc.topology, sc.seed);
  Engine eng(topo, sc);
  CHECK(eng.assignment().primary_of(1) == 1);

  // First event is inter-region; the accrued attraction (1.0 vs 0.0 for
  // the home region) immediately clears the zero hysteresis margin and
  // region 0 has room, so cell 1 switches.
  eng.process_event({0, 0, 0, 1});
  CHECK(eng.assignment().primary_of(1) == 0);
  CHECK(eng.result().switches == 1);

  // Later events run inside region 0 over the direct link.
  eng.process_event({1, 0, 0, 1});
  eng.process_event({2, 0, 0, 1});
  eng.finish();

  const RunResult& r = eng.result();
  CHECK(r.events == 3);
  CHECK(r.s1_inter == 1);
  CHECK(r.x2 == 2);
  CHECK(r.s1_intra == 0);
  CHECK(r.switches == 1);
  CHECK(r.final_primary == std::vector<RegionId>{0, 0});
  CHECK(r.final_loads.at(0) == doctest::Approx(2.0));
  CHECK(r.handover_signaling == doctest::Approx(18.0 + 8.0 + 8.0));
  CHECK(r.assignment_signaling > 0.0);
}

TEST_CASE("frozen mode updates counters but never reassigns") {
  Scenario sc = two_cell_scenario();
  sc.mode = AlgorithmMode::Frozen;
  Topology topo = build(sc.topology, sc.seed);
  Engine eng(topo, sc);
  for (std::uint64_t t = 0; t < 3; ++t) eng.process_event({t, 0, 0, 1});
  eng.finish();

  const RunResult& r = eng.result();
  CHECK(r.s1_inter == 3);
  CHECK(r.x2 == 0);
  CHECK(r.switches == 0);
  CHECK(r.assignment_signaling == doctest::Approx(0.0));
  CHECK(r.final_primary == std::vector<RegionId>{0, 1});

  // The attraction table still learned where the traffic comes from.
  auto attraction = eng.cell_agent(1).attraction(eng.directory());
  REQUIRE(attraction.has_value());
  CHECK(attraction->value_or_zero(0) == doctest::Approx(1.0));
}

TEST_CASE("stepping preserves assignment and load invariants") {
  Rng pick(2026);
  for (int round = 0; round < 12; ++round) {
    Scenario sc;
    const std::uint32_t w = 3 + pick.uniform_u32(2);
    sc.topology = TopologySpec::grid(w, 3);
    sc.mobility = MobilityModel::random_walk(1.0);
    sc.n_ues = 1 + pick.uniform_u32(4);
    const std::uint32_t n_regions = 2 + pick.uniform_u32(2);
    const double cap =
        std::ceil(static_cast<double>(w * 3) / n_regions) + pick.uniform_u32(3);
    sc.initial_capacities.assign(n_regions, cap);
    sc.agent.k = 1;
    sc.agent.gamma = 0.9;
    sc.agent.epsilon = 0.01 * pick.uniform_u32(10);
    sc.delta = 0.01 * pick.uniform_u32(10);
    sc.agent.refresh_interval = 10 + pick.uniform_u32(90);
    sc.seed = pick.next_u64();
    sc.window = 100;

    Topology topo = build(sc.topology, sc.seed);
    Rng mob = Rng::substream(sc.seed, "mobility");
    auto events = generate_handovers(sc.mobility, topo, sc.n_ues, 400, mob);
    Engine eng(topo, sc);
    check_assignment_invariants(eng, 1);
    std::uint64_t step = 0;
    for (const auto& ev : events) {
      eng.process_event(ev);
      if (++step % 100 == 0) check_assignment_invariants(eng, 1);
    }
    eng.finish();
    check_assignment_invariants(eng, 1);
    const RunResult& r = eng.result();
    CHECK(r.events == events.size());
    CHECK(r.x2 + r.s1_intra + r.s1_inter == r.events);
    if (r.forced_assignments == 0) {
      for (const auto& [region, load] : r.final_loads) {
        CHECK(load <= eng.directory().capacity_of(region) + 1e-9);
      }
    }
  }
}

TEST_CASE("scale up adds an empty region without touching assignments") {
  Scenario sc = two_cell_scenario();
  Topology topo = build(sc.topology, sc.seed);
  Engine eng(topo, sc);
  auto before = eng.assignment().primary_vector();

  eng.apply_scale_event({0, ScaleEvent::Kind::Up, 5.0, 0});
  CHECK(eng.directory().live_count() == 3);
  CHECK(eng.directory().capacity_of(2) == doctest::Approx(5.0));
  CHECK(eng.assignment().primary_vector() == before);
  CHECK(eng.mme_agent(2).load() == doctest::Approx(0.0));
}

TEST_CASE("scale down evacuates the retired region") {
  Scenario sc = two_cell_scenario();
  Topology topo = build(sc.topology, sc.seed);
  Engine eng(topo, sc);

  eng.apply_scale_event({0, ScaleEvent::Kind::Down, 0.0, 1});
  CHECK_FALSE(eng.directory().is_live(1));
  CHECK(eng.directory().is_retired(1));
  for (CellId c = 0; c < 2; ++c) {
    for (RegionId r : eng.assignment().regions_of(c)) CHECK(r != 1);
  }
  CHECK(eng.assignment().primary_of(1) == 0);

  // Only one region left now; retiring it is refused.
  try {
    eng.apply_scale_event({1, ScaleEvent::Kind::Down, 0.0, 0});
    FAIL("expected throw");
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::LastRegion);
  }
  // And the already-retired id stays dead.
  CHECK_THROWS_AS(
      eng.apply_scale_event({1, ScaleEvent::Kind::Down, 0.0, 1}), SimError);
}

TEST_CASE("whole runs replay byte for byte") {
  Scenario sc;
  sc.topology = TopologySpec::community(2, 6, 2);
  sc.mobility = MobilityModel::community_flow(0.9, 0.5);
  sc.n_ues = 4;
  sc.n_events = 1500;
  sc.initial_capacities = {8, 8};
  sc.agent.k = 1;
  sc.agent.gamma = 0.99;
  sc.agent.epsilon = 0.05;
  sc.delta = 0.05;
  sc.window = 200;
  sc.seed = 99;
  sc.record.messages = true;

  RunResult a = run_scenario(sc);
  RunResult b = run_scenario(sc);
  CHECK(a.events == 1500);
  CHECK(a.final_primary == b.final_primary);
  CHECK(a.switches == b.switches);
  CHECK(a.x2 == b.x2);
  CHECK(a.s1_intra == b.s1_intra);
  CHECK(a.s1_inter == b.s1_inter);
  CHECK(a.handover_signaling == b.handover_signaling);
  CHECK(a.assignment_signaling == b.assignment_signaling);
  CHECK(a.windows.size() == b.windows.size());
  REQUIRE(a.messages.size() == b.messages.size());
  for (std::size_t i = 0; i < a.messages.size(); ++i) {
    CHECK(a.messages[i].csv_row() == b.messages[i].csv_row());
  }
  REQUIRE(a.flow.has_value());
  double flow_total = 0.0;
  for (CellId i = 0; i < a.flow->size(); ++i)
    for (CellId j = 0; j < a.flow->size(); ++j) flow_total += a.flow->at(i, j);
  CHECK(flow_total == doctest::Approx(1500.0));

  Scenario other = sc;
  other.seed = 100;
  RunResult c = run_scenario(other);
  CHECK(a.final_primary != c.final_primary);
}

TEST_CASE("an empty run leaves the initial deal untouched") {
  Scenario sc = two_cell_scenario();
  RunResult r = run_scenario(sc);
  CHECK(r.events == 0);
  CHECK(r.windows.empty());
  CHECK(r.final_primary == std::vector<RegionId>{0, 1});
  CHECK(r.total_signaling() == doctest::Approx(0.0));
  CHECK(r.overall_ratio() == doctest::Approx(0.0));
}

TEST_CASE("trailing partial windows are flushed once") {
  Scenario sc = two_cell_scenario();
  sc.n_events = 7;
  sc.window = 3;
  Topology topo = build(sc.topology, sc.seed);
  Engine eng(topo, sc);
  for (std::uint64_t t = 0; t < 7; ++t) eng.process_event({t, 0, 0, 1});
  eng.finish();
  eng.finish();  // idempotent

  const RunResult& r = eng.result();
  REQUIRE(r.windows.size() == 3);
  std::vector<std::uint64_t> sizes;
  for (const auto& w : r.windows) {
    sizes.push_back(w.x2 + w.s1_intra + w.s1_inter);
  }
  CHECK(sizes == std::vector<std::uint64_t>{3, 3, 1});
  CHECK(r.windows[0].window == 0);
  CHECK(r.windows[2].window == 2);
}

TEST_CASE("scheduled scale events land inside the run") {
  Scenario sc;
  sc.topology = TopologySpec::community(2, 6, 2);
  sc.mobility = MobilityModel::community_flow(0.9, 0.5);
  sc.n_ues = 4;
  sc.n_events = 400;
  sc.initial_capacities = {12, 12};
  sc.agent.k = 1;
  sc.window = 100;
  sc.seed = 3;
  sc.scale_events = {{200, ScaleEvent::Kind::Up, 12.0, 0}};

  RunResult r = run_scenario(sc);
  CHECK(r.final_capacities.size() == 3);
  CHECK(r.final_capacities.count(2) == 1);
  CHECK(r.final_capacities.at(2) == doctest::Approx(12.0));
}

}  // TEST_SUITE
