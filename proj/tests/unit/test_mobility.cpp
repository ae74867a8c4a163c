#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "regionsim/mobility.hpp"
#include "regionsim/rng.hpp"
#include "regionsim/topology.hpp"

using namespace regionsim;

namespace {

Topology make_topo(const TopologySpec& spec, std::uint64_t seed = 1) {
  Rng rng = Rng::substream(seed, "topology");
  return build_topology(spec, rng);
}

std::filesystem::path write_temp(const std::string& name,
                                 const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << text;
  return path;
}

}  // namespace

TEST_SUITE("mobility") {

TEST_CASE("random walk steps onto adjacent cells only") {
  Topology topo = make_topo(TopologySpec::grid(4, 4));
  Rng rng(3);
  MobilityModel model = MobilityModel::random_walk(1.0);
  std::set<CellId> seen;
  CellId at = 5;
  for (int i = 0; i < 200; ++i) {
    auto next = step_ue(model, topo, at, rng);
    REQUIRE(next.has_value());  // p_move = 1 never stays
    CHECK(topo.adjacent(at, *next));
    seen.insert(*next);
    at = *next;
  }
  CHECK(seen.size() > 4);  // actually walks around
}

TEST_CASE("p_move throttles ticks, not event statistics") {
  Topology topo = make_topo(TopologySpec::grid(4, 4));
  Rng rng(3);
  MobilityModel model = MobilityModel::random_walk(0.25);
  int stays = 0;
  for (int i = 0; i < 2000; ++i) {
    if (!step_ue(model, topo, 5, rng)) ++stays;
  }
  // Stay fraction tracks 1 - p_move (binomial sigma ~ 0.0097).
  CHECK(stays > 1400);
  CHECK(stays < 1600);
}

TEST_CASE("generated streams are dense, adjacent, and reproducible") {
  Topology topo = make_topo(TopologySpec::community(2, 12, 2));
  MobilityModel model = MobilityModel::community_flow(0.95, 0.5);
  Rng r1 = Rng::substream(42, "mobility");
  auto events = generate_handovers(model, topo, 8, 5000, r1);
  REQUIRE(events.size() == 5000);
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(events[i].time == i);
    CHECK(events[i].ue < 8);
    CHECK(events[i].source != events[i].target);
    CHECK(topo.adjacent(events[i].source, events[i].target));
  }
  // Per-UE continuity: each UE resumes from its previous target.
  std::map<UeId, CellId> at;
  for (const auto& e : events) {
    auto it = at.find(e.ue);
    if (it != at.end()) CHECK(it->second == e.source);
    at[e.ue] = e.target;
  }

  Rng r2 = Rng::substream(42, "mobility");
  auto replay = generate_handovers(model, topo, 8, 5000, r2);
  REQUIRE(replay.size() == events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(replay[i].ue == events[i].ue);
    CHECK(replay[i].source == events[i].source);
    CHECK(replay[i].target == events[i].target);
  }
}

TEST_CASE("community flow crosses at rate 1-q where a choice exists") {
  Topology topo = make_topo(TopologySpec::community(2, 12, 2));
  MobilityModel model = MobilityModel::community_flow(0.95, 0.5);
  Rng rng = Rng::substream(11, "mobility");
  auto events = generate_handovers(model, topo, 50, 200000, rng);

  std::uint64_t bridge_sourced = 0;
  std::uint64_t crossed = 0;
  for (const auto& e : events) {
    bool has_cross = false;
    for (CellId nb : topo.neighbors(e.source)) {
      if (topo.community_of(nb) != topo.community_of(e.source)) {
        has_cross = true;
        break;
      }
    }
    if (!has_cross) {
      // Interior cells can never emit a cross-community handover.
      CHECK(topo.community_of(e.source) == topo.community_of(e.target));
      continue;
    }
    ++bridge_sourced;
    if (topo.community_of(e.source) != topo.community_of(e.target)) ++crossed;
  }
  REQUIRE(bridge_sourced > 10000);
  const double fraction =
      static_cast<double>(crossed) / static_cast<double>(bridge_sourced);
  CHECK(fraction == doctest::Approx(0.05).epsilon(0.2));  // +-1 percentage pt
  CHECK(fraction > 0.04);
  CHECK(fraction < 0.06);
}

TEST_CASE("community flow requires community labels") {
  Topology topo = make_topo(TopologySpec::grid(3, 3));
  Rng rng(1);
  MobilityModel model = MobilityModel::community_flow(0.9, 0.5);
  try {
    (void)step_ue(model, topo, 0, rng);
    FAIL("expected throw");
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
}

TEST_CASE("zero UEs rejected") {
  Topology topo = make_topo(TopologySpec::grid(2, 2));
  Rng rng(1);
  CHECK_THROWS_AS(
      generate_handovers(MobilityModel::random_walk(0.5), topo, 0, 10, rng),
      SimError);
}

TEST_CASE("trace parsing accepts valid rows and pins errors to lines") {
  Topology topo = make_topo(TopologySpec::grid(3, 1));  // path 0-1-2
  auto good = write_temp("trace_good.csv",
                         "time,ue,source,target\n"
                         "0,0,0,1\n"
                         "1,1,1,2\n"
                         "\n"
                         "2,0,1,0\n");
  auto events = load_trace(good.string(), topo);
  REQUIRE(events.size() == 3);
  CHECK(events[1].ue == 1);
  CHECK(events[1].source == 1);
  CHECK(events[1].target == 2);

  auto expect_bad = [&](const std::string& name, const std::string& text,
                        ErrorCode code, const std::string& needle) {
    auto path = write_temp(name, text);
    try {
      load_trace(path.string(), topo);
      FAIL("expected throw");
    } catch (const SimError& e) {
      CHECK(e.code() == code);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_bad("trace_nohdr.csv", "0,0,0,1\n", ErrorCode::ParseError, "header");
  expect_bad("trace_short.csv", "time,ue,source,target\n0,0,1\n",
             ErrorCode::ParseError, "line 2");
  expect_bad("trace_alpha.csv", "time,ue,source,target\n0,x,0,1\n",
             ErrorCode::ParseError, "line 2");
  expect_bad("trace_jump.csv", "time,ue,source,target\n0,0,0,2\n",
             ErrorCode::NonAdjacentHandover, "line 2");
  expect_bad("trace_self.csv", "time,ue,source,target\n0,0,1,1\n",
             ErrorCode::ParseError, "source equals target");
  expect_bad("trace_range.csv", "time,ue,source,target\n0,0,0,9\n",
             ErrorCode::NonAdjacentHandover, "9");
  expect_bad("trace_order.csv",
             "time,ue,source,target\n1,0,0,1\n1,0,1,2\n",
             ErrorCode::ParseError, "ascending");
  CHECK_THROWS_AS(load_trace("/nonexistent/trace.csv", topo), SimError);
}

TEST_CASE("flow matrix accumulates and round-trips through csv") {
  FlowMatrix flow(3);
  flow.add(0, 1);
  flow.add(0, 1);
  flow.add(2, 0, 2.5);
  CHECK(flow.at(0, 1) == doctest::Approx(2.0));
  CHECK(flow.at(1, 0) == doctest::Approx(0.0));
  CHECK(flow.total() == doctest::Approx(4.5));
  CHECK_THROWS_AS(flow.add(3, 0), SimError);
  CHECK_THROWS_AS((void)flow.at(0, 3), SimError);

  auto path = std::filesystem::temp_directory_path() / "flow_rt.csv";
  flow.save_csv(path.string());
  FlowMatrix back = FlowMatrix::load_csv(path.string());
  REQUIRE(back.size() == 3);
  for (CellId i = 0; i < 3; ++i)
    for (CellId j = 0; j < 3; ++j)
      CHECK(back.at(i, j) == doctest::Approx(flow.at(i, j)));

  FlowMatrix padded = FlowMatrix::load_csv(path.string(), 10);
  CHECK(padded.size() == 10);
  CHECK(padded.at(2, 0) == doctest::Approx(2.5));
}

TEST_CASE("flow matrix of an event stream counts ordered pairs") {
  std::vector<HandoverEvent> events = {
      {0, 0, 1, 2}, {1, 0, 2, 1}, {2, 1, 1, 2}};
  FlowMatrix flow = flow_matrix(events, 4);
  CHECK(flow.at(1, 2) == doctest::Approx(2.0));
  CHECK(flow.at(2, 1) == doctest::Approx(1.0));
  CHECK(flow.total() == doctest::Approx(3.0));
}

}  // TEST_SUITE
