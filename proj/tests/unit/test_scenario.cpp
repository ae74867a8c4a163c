#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "regionsim/scenario.hpp"

using namespace regionsim;
using nlohmann::ordered_json;

namespace {

ordered_json base_doc() {
  return ordered_json::parse(R"({
    "topology": {"kind": "grid", "width": 2, "height": 2},
    "mobility": {"kind": "random_walk"},
    "n_ues": 1,
    "n_events": 10,
    "regions": {"count": 2, "capacity": 4},
    "seed": 5
  })");
}

void expect_config_error(const ordered_json& doc, const std::string& needle) {
  try {
    (void)parse_scenario(doc.dump());
    FAIL("expected ConfigError for " << needle);
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("minimal document fills documented defaults") {
  Scenario sc = parse_scenario(base_doc().dump());
  CHECK(sc.topology.kind == TopologySpec::Kind::Grid);
  CHECK(sc.topology.p_x2 == doctest::Approx(1.0));
  CHECK(sc.mobility.kind == MobilityModel::Kind::RandomWalk);
  CHECK(sc.mobility.p_move == doctest::Approx(0.5));
  CHECK(sc.n_ues == 1);
  CHECK(sc.n_events == 10);
  CHECK(sc.initial_capacities == std::vector<double>{4.0, 4.0});
  CHECK(sc.init_policy == InitPolicy::Random);
  CHECK(sc.agent.k == 1);
  CHECK(sc.agent.gamma == doctest::Approx(0.995));
  CHECK(sc.agent.epsilon == doctest::Approx(0.05));
  CHECK(sc.delta == doctest::Approx(0.05));
  CHECK(sc.agent.refresh_interval == 100);
  CHECK(sc.load_mode == CellLoadMode::Uniform);
  CHECK(sc.cost.msgs_x2 == 8);
  CHECK(sc.cost.msgs_s1_intra == 12);
  CHECK(sc.cost.msgs_s1_inter == 18);
  CHECK(sc.cost.msgs_assignment_change == 2);
  CHECK(sc.scale_events.empty());
  CHECK(sc.mode == AlgorithmMode::Active);
  CHECK(sc.seed == 5);
  CHECK(sc.window == 500);
  CHECK_FALSE(sc.record.messages);
  CHECK(sc.record.flow);
}

TEST_CASE("malformed json is a parse error, not a config error") {
  try {
    (void)parse_scenario("{nope");
    FAIL("expected throw");
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
  try {
    (void)parse_scenario("[1, 2]");
    FAIL("expected throw");
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
}

TEST_CASE("unknown keys are rejected at every level") {
  auto doc = base_doc();
  doc["frobnicate"] = 1;
  expect_config_error(doc, "unknown key 'frobnicate'");

  doc = base_doc();
  doc["agent"] = {{"k", 1}, {"foo", 2}};
  expect_config_error(doc, "agent: unknown key 'foo'");

  doc = base_doc();
  doc["topology"]["depth"] = 3;
  expect_config_error(doc, "topology: unknown key 'depth'");

  doc = base_doc();
  doc["mobility"]["q"] = 0.9;  // random_walk takes no q
  expect_config_error(doc, "mobility: unknown key 'q'");
}

TEST_CASE("validation rejects out-of-range settings") {
  auto doc = base_doc();
  doc["window"] = 0;
  expect_config_error(doc, "window");

  doc = base_doc();
  doc["agent"] = {{"k", 0}};
  expect_config_error(doc, "agent.k");

  doc = base_doc();
  doc["agent"] = {{"k", 3}};
  expect_config_error(doc, "agent.k exceeds");

  doc = base_doc();
  doc["agent"] = {{"gamma", 1.5}};
  expect_config_error(doc, "agent.gamma");

  doc = base_doc();
  doc["agent"] = {{"epsilon", -0.1}};
  expect_config_error(doc, "agent.epsilon");

  doc = base_doc();
  doc["mobility"] = {{"kind", "random_walk"}, {"p_move", 0.0}};
  expect_config_error(doc, "p_move");

  doc = base_doc();
  doc["regions"] = {{"count", 2}, {"capacity", 1.5}};  // sums below n_cells
  expect_config_error(doc, "below k * n_cells");

  doc = base_doc();
  doc["regions"] = {{"count", 2}, {"capacity", 4}, {"capacities", {4, 4}}};
  expect_config_error(doc, "capacities");

  doc = base_doc();
  doc["mobility"] = {{"kind", "community_flow"}, {"q", 0.9}};
  expect_config_error(doc, "community topology");
}

TEST_CASE("pinned assignments are checked cell by cell") {
  auto doc = base_doc();
  doc["init_policy"] = "pinned";
  expect_config_error(doc, "one region per cell");

  doc["pinned_assignment"] = {0, 0, 1, 1};
  Scenario sc = parse_scenario(doc.dump());
  CHECK(sc.init_policy == InitPolicy::Pinned);
  CHECK(sc.pinned_assignment == std::vector<RegionId>{0, 0, 1, 1});

  doc["pinned_assignment"] = {0, 0, 1, 7};
  expect_config_error(doc, "unknown region 7");

  doc["pinned_assignment"] = {0, 0, 0, 0};  // region 0 holds 4 > capacity 4?
  doc["regions"] = {{"count", 2}, {"capacity", 3}};
  expect_config_error(doc, "overfills region 0");

  doc = base_doc();
  doc["pinned_assignment"] = {0, 0, 1, 1};  // without the pinned policy
  expect_config_error(doc, "requires init_policy = pinned");
}

TEST_CASE("scale schedules replay against the future directory") {
  auto doc = base_doc();
  doc["scale_events"] = ordered_json::array(
      {{{"time", 5}, {"kind", "up"}, {"capacity", 4.0}},
       {{"time", 7}, {"kind", "down"}, {"region", 0}}});
  Scenario sc = parse_scenario(doc.dump());
  REQUIRE(sc.scale_events.size() == 2);
  CHECK(sc.scale_events[0].kind == ScaleEvent::Kind::Up);
  CHECK(sc.scale_events[1].region == 0);

  doc["scale_events"] = ordered_json::array(
      {{{"time", 7}, {"kind", "down"}, {"region", 0}},
       {{"time", 5}, {"kind", "up"}, {"capacity", 4.0}}});
  expect_config_error(doc, "ordered by time");

  doc["scale_events"] = ordered_json::array(
      {{{"time", 5}, {"kind", "down"}, {"region", 9}}});
  expect_config_error(doc, "not live");

  doc["scale_events"] = ordered_json::array(
      {{{"time", 5}, {"kind", "down"}, {"region", 0}},
       {{"time", 6}, {"kind", "down"}, {"region", 1}}});
  expect_config_error(doc, "last live region");

  doc["scale_events"] = ordered_json::array(
      {{{"time", 5}, {"kind", "up"}, {"capacity", 4.0}, {"region", 2}}});
  expect_config_error(doc, "'up' does not take 'region'");

  doc["scale_events"] = ordered_json::array(
      {{{"time", 5}, {"kind", "down"}}});
  expect_config_error(doc, "missing required key 'region'");
}

TEST_CASE("canonical form is stable under reparsing") {
  Scenario sc = parse_scenario(base_doc().dump());
  std::string first = scenario_to_canonical_json(sc);
  std::string second = scenario_to_canonical_json(parse_scenario(first));
  CHECK(first == second);

  // Key order in the source document must not leak into the canonical form.
  auto shuffled = ordered_json::parse(R"({
    "seed": 5,
    "regions": {"capacity": 4, "count": 2},
    "n_events": 10,
    "mobility": {"kind": "random_walk"},
    "topology": {"height": 2, "kind": "grid", "width": 2},
    "n_ues": 1
  })");
  CHECK(scenario_to_canonical_json(parse_scenario(shuffled.dump())) == first);
}

TEST_CASE("digest ignores the seed but nothing else") {
  Scenario sc = parse_scenario(base_doc().dump());
  std::string d = scenario_digest(sc);
  CHECK(d.size() == 16);
  CHECK(d.find_first_not_of("0123456789abcdef") == std::string::npos);

  Scenario reseeded = sc;
  reseeded.seed = 999;
  CHECK(scenario_digest(reseeded) == d);

  Scenario longer = sc;
  longer.n_events = 11;
  CHECK(scenario_digest(longer) != d);
}

TEST_CASE("relative topology paths resolve against the scenario file") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "regionsim_scenario_test";
  fs::create_directories(dir);
  {
    std::ofstream topo(dir / "topo.txt");
    topo << "cells 3\n0 1\n1 2\n";
  }
  auto doc = base_doc();
  doc["topology"] = {{"kind", "explicit"}, {"path", "topo.txt"}};
  doc["regions"] = {{"count", 2}, {"capacity", 3}};
  {
    std::ofstream out(dir / "scenario.json");
    out << doc.dump();
  }
  Scenario sc = load_scenario((dir / "scenario.json").string());
  CHECK(sc.topology.kind == TopologySpec::Kind::Explicit);
  CHECK(sc.topology.n_cells == 3);
  CHECK(sc.topology.edges.size() == 2);

  try {
    (void)load_scenario((dir / "missing.json").string());
    FAIL("expected throw");
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}

TEST_CASE("trace mobility does not require event counts") {
  auto doc = base_doc();
  doc.erase("n_ues");
  doc.erase("n_events");
  doc["mobility"] = {{"kind", "trace"}, {"path", "/tmp/none.csv"}};
  Scenario sc = parse_scenario(doc.dump());
  CHECK(sc.mobility.kind == MobilityModel::Kind::Trace);
  CHECK(sc.mobility.trace_path == "/tmp/none.csv");
  CHECK(sc.n_events == 0);
}

}  // TEST_SUITE
