#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "regionsim/rng.hpp"
#include "regionsim/topology.hpp"

using namespace regionsim;

namespace {

Topology build(const TopologySpec& spec, std::uint64_t seed = 1) {
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

TEST_SUITE("topology") {

TEST_CASE("grid shape and coordinates") {
  Topology t = build(TopologySpec::grid(3, 3));
  CHECK(t.cell_count() == 9);
  CHECK(t.edge_count() == 12);
  // Row-major ids: corner 0 touches 1 (right) and 3 (below).
  CHECK(t.neighbors(0) == std::vector<CellId>{1, 3});
  CHECK(t.neighbors(4) == std::vector<CellId>{1, 3, 5, 7});
  CHECK(t.adjacent(0, 1));
  CHECK_FALSE(t.adjacent(0, 4));
  CHECK_FALSE(t.adjacent(0, 0));
  REQUIRE(t.has_coordinates());
  CHECK(t.coordinate(1).x == doctest::Approx(1.0));
  CHECK(t.coordinate(1).y == doctest::Approx(0.0));
  CHECK(t.coordinate(5).x == doctest::Approx(2.0));
  CHECK(t.coordinate(5).y == doctest::Approx(1.0));
  CHECK(t.community_of(0) == -1);
}

TEST_CASE("grid rejects zero dimensions") {
  CHECK_THROWS_AS(build(TopologySpec::grid(0, 3)), SimError);
  try {
    build(TopologySpec::grid(3, 0));
    FAIL("expected throw");
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::MalformedSpec);
  }
}

TEST_CASE("community rings carry distance-1 and distance-2 chords") {
  Topology t = build(TopologySpec::community(2, 12, 2));
  CHECK(t.cell_count() == 24);
  CHECK(t.community_count() == 2);
  for (CellId c = 0; c < 12; ++c) CHECK(t.community_of(c) == 0);
  for (CellId c = 12; c < 24; ++c) CHECK(t.community_of(c) == 1);
  // Ring neighbors of cell 3: offsets +-1 and +-2 inside the community.
  CHECK(t.neighbors(3) == std::vector<CellId>{1, 2, 4, 5});
  // Wraparound at the ring seam.
  CHECK(t.adjacent(0, 11));
  CHECK(t.adjacent(0, 10));
  // Bridges at evenly spread offsets: (0,12) and (6,18) for inter_edges=2.
  CHECK(t.adjacent(0, 12));
  CHECK(t.adjacent(6, 18));
  CHECK_FALSE(t.adjacent(1, 13));
  // 24 ring edges per community plus the two bridges.
  CHECK(t.edge_count() == 2 * 24 + 2);
}

TEST_CASE("community cells sit on one shared circle at unit spacing") {
  Topology t = build(TopologySpec::community(3, 8, 2));
  REQUIRE(t.has_coordinates());
  const double r = std::hypot(t.coordinate(0).x, t.coordinate(0).y);
  for (CellId c = 0; c < t.cell_count(); ++c) {
    CHECK(std::hypot(t.coordinate(c).x, t.coordinate(c).y) ==
          doctest::Approx(r));
  }
  auto dist = [&](CellId a, CellId b) {
    return std::hypot(t.coordinate(a).x - t.coordinate(b).x,
                      t.coordinate(a).y - t.coordinate(b).y);
  };
  CHECK(dist(0, 1) == doctest::Approx(1.0));
  // Consecutive communities are geometric neighbors, not separated clusters.
  CHECK(dist(7, 8) == doctest::Approx(1.0));
}

TEST_CASE("community spec validation") {
  auto expect = [](TopologySpec spec, ErrorCode code) {
    try {
      build(spec);
      FAIL("expected throw");
    } catch (const SimError& e) {
      CHECK(e.code() == code);
    }
  };
  expect(TopologySpec::community(0, 12, 2), ErrorCode::MalformedSpec);
  expect(TopologySpec::community(2, 2, 1), ErrorCode::MalformedSpec);
  expect(TopologySpec::community(2, 12, 13), ErrorCode::MalformedSpec);
  expect(TopologySpec::community(1, 12, 1), ErrorCode::MalformedSpec);
  CHECK(build(TopologySpec::community(1, 12, 0)).cell_count() == 12);
}

TEST_CASE("explicit graph validation") {
  auto expect = [](std::uint32_t n, std::vector<ExplicitEdge> edges,
                   ErrorCode code) {
    try {
      build(TopologySpec::explicit_graph(n, std::move(edges)));
      FAIL("expected throw");
    } catch (const SimError& e) {
      CHECK(e.code() == code);
    }
  };
  expect(3, {{0, 0, {}}}, ErrorCode::MalformedSpec);              // self-loop
  expect(3, {{0, 1, {}}, {1, 0, {}}}, ErrorCode::MalformedSpec);  // duplicate
  expect(3, {{0, 5, {}}}, ErrorCode::MalformedSpec);              // range
  expect(4, {{0, 1, {}}, {2, 3, {}}}, ErrorCode::DisconnectedGraph);
  expect(0, {}, ErrorCode::MalformedSpec);

  // A single isolated cell is trivially connected.
  CHECK(build(TopologySpec::explicit_graph(1, {})).cell_count() == 1);
  CHECK_FALSE(build(TopologySpec::explicit_graph(1, {})).has_coordinates());
}

TEST_CASE("direct links follow pinned flags and p_x2") {
  Topology all = build(TopologySpec::community(2, 12, 2, 1.0));
  CHECK(all.direct_link_count() == all.edge_count());
  CHECK(all.has_direct_link(0, 12));

  Topology none = build(TopologySpec::community(2, 12, 2, 0.0));
  CHECK(none.direct_link_count() == 0);
  CHECK_FALSE(none.has_direct_link(0, 1));
  CHECK(none.adjacent(0, 1));  // adjacency unaffected

  // Pinned explicit flags win over the draw.
  Topology pinned = build(TopologySpec::explicit_graph(
      3, {{0, 1, true}, {1, 2, false}}, 0.0));
  CHECK(pinned.has_direct_link(0, 1));
  CHECK_FALSE(pinned.has_direct_link(1, 2));
  CHECK_FALSE(pinned.has_direct_link(0, 2));  // not even adjacent
}

TEST_CASE("direct link draw is reproducible per seed") {
  TopologySpec spec = TopologySpec::grid(6, 6, 0.5);
  Topology a = build(spec, 7);
  Topology b = build(spec, 7);
  Topology c = build(spec, 8);
  auto links = [](const Topology& t) {
    std::vector<std::pair<CellId, CellId>> out;
    for (const auto& e : t.edges())
      if (t.has_direct_link(e.first, e.second)) out.push_back(e);
    return out;
  };
  CHECK(links(a) == links(b));
  CHECK(links(a) != links(c));
  CHECK(a.direct_link_count() > 0);
  CHECK(a.direct_link_count() < a.edge_count());
}

TEST_CASE("random explicit graphs keep adjacency invariants") {
  Rng gen(99);
  for (int round = 0; round < 50; ++round) {
    const std::uint32_t n = 2 + gen.uniform_u32(12);
    std::vector<ExplicitEdge> edges;
    std::set<std::pair<CellId, CellId>> used;
    // Random spanning tree guarantees connectivity.
    for (CellId v = 1; v < n; ++v) {
      CellId u = gen.uniform_u32(v);
      edges.push_back({u, v, {}});
      used.insert({u, v});
    }
    for (std::uint32_t extra = gen.uniform_u32(n); extra > 0; --extra) {
      CellId a = gen.uniform_u32(n);
      CellId b = gen.uniform_u32(n);
      if (a == b) continue;
      auto key = std::minmax(a, b);
      if (!used.insert({key.first, key.second}).second) continue;
      edges.push_back({key.first, key.second, {}});
    }
    Topology t = build(TopologySpec::explicit_graph(n, edges, 0.5), round);

    CHECK(t.edge_count() == used.size());
    std::size_t degree_sum = 0;
    for (CellId c = 0; c < n; ++c) {
      const auto& nb = t.neighbors(c);
      CHECK(std::is_sorted(nb.begin(), nb.end()));
      CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
      degree_sum += nb.size();
      for (CellId other : nb) {
        CHECK(other != c);
        CHECK(t.adjacent(other, c));  // symmetry
      }
    }
    CHECK(degree_sum == 2 * t.edge_count());
    for (const auto& e : t.edges()) CHECK(e.first < e.second);
    CHECK(std::is_sorted(t.edges().begin(), t.edges().end()));
  }
}

TEST_CASE("topology file parsing") {
  auto good = write_temp("topo_good.txt",
                         "# comment line\n"
                         "cells 4\n"
                         "0 1 direct\n"
                         "1 2 s1only\n"
                         "2 3\n");
  TopologySpec spec = load_topology_spec(good.string());
  CHECK(spec.kind == TopologySpec::Kind::Explicit);
  CHECK(spec.n_cells == 4);
  REQUIRE(spec.edges.size() == 3);
  CHECK(spec.edges[0].direct == std::optional<bool>(true));
  CHECK(spec.edges[1].direct == std::optional<bool>(false));
  CHECK_FALSE(spec.edges[2].direct.has_value());
  Topology t = build(spec);
  CHECK(t.has_direct_link(0, 1));
  CHECK_FALSE(t.has_direct_link(1, 2));

  auto expect_bad = [](const std::string& name, const std::string& text,
                       const std::string& needle) {
    auto path = write_temp(name, text);
    try {
      load_topology_spec(path.string());
      FAIL("expected throw");
    } catch (const SimError& e) {
      CHECK(e.code() == ErrorCode::MalformedSpec);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_bad("topo_nohdr.txt", "0 1\n", "line 1");
  expect_bad("topo_badflag.txt", "cells 3\n0 1 maybe\n", "line 2");
  expect_bad("topo_short.txt", "cells 3\n0\n", "line 2");
  CHECK_THROWS_AS(load_topology_spec("/nonexistent/topo.txt"), SimError);
}

TEST_CASE("cell range checks") {
  Topology t = build(TopologySpec::grid(2, 2));
  CHECK_THROWS_AS(t.neighbors(4), SimError);
  CHECK_THROWS_AS(t.coordinate(99), SimError);
  CHECK_THROWS_AS((void)t.adjacent(0, 17), SimError);
}

}  // TEST_SUITE
