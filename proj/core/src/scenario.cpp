#include "regionsim/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "regionsim/rng.hpp"

namespace regionsim {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& msg) {
  throw SimError(ErrorCode::ConfigError, msg);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      config_error(where + ": unknown key '" + it.key() + "'");
    }
  }
}

const json& require(const json& obj, const std::string& where,
                    const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    config_error(where + ": missing required key '" + key + "'");
  }
  return *it;
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (base_dir.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

TopologySpec parse_topology(const json& obj, const std::string& base_dir) {
  if (!obj.is_object()) config_error("topology: expected an object");
  std::string kind = require(obj, "topology", "kind").get<std::string>();
  if (kind == "grid") {
    check_keys(obj, "topology", {"kind", "width", "height", "p_x2"});
    auto spec = TopologySpec::grid(
        require(obj, "topology", "width").get<std::uint32_t>(),
        require(obj, "topology", "height").get<std::uint32_t>());
    spec.p_x2 = obj.value("p_x2", 1.0);
    return spec;
  }
  if (kind == "community") {
    check_keys(obj, "topology",
               {"kind", "n_communities", "cells_per_community", "inter_edges",
                "p_x2"});
    auto spec = TopologySpec::community(
        require(obj, "topology", "n_communities").get<std::uint32_t>(),
        require(obj, "topology", "cells_per_community").get<std::uint32_t>(),
        require(obj, "topology", "inter_edges").get<std::uint32_t>());
    spec.p_x2 = obj.value("p_x2", 1.0);
    return spec;
  }
  if (kind == "explicit") {
    check_keys(obj, "topology", {"kind", "path", "n_cells", "edges", "p_x2"});
    if (obj.contains("path")) {
      if (obj.contains("n_cells") || obj.contains("edges")) {
        config_error("topology: 'path' excludes inline 'n_cells'/'edges'");
      }
      auto spec = load_topology_spec(
          resolve(obj["path"].get<std::string>(), base_dir));
      spec.p_x2 = obj.value("p_x2", 1.0);
      return spec;
    }
    std::vector<ExplicitEdge> edges;
    for (const auto& e : require(obj, "topology", "edges")) {
      if (!e.is_array() || e.size() < 2 || e.size() > 3) {
        config_error("topology.edges: expected [a, b] or [a, b, tag]");
      }
      ExplicitEdge edge;
      edge.a = e[0].get<CellId>();
      edge.b = e[1].get<CellId>();
      if (e.size() == 3) {
        std::string tag = e[2].get<std::string>();
        if (tag == "direct") {
          edge.direct = true;
        } else if (tag == "s1only") {
          edge.direct = false;
        } else {
          config_error("topology.edges: unknown tag '" + tag + "'");
        }
      }
      edges.push_back(edge);
    }
    auto spec = TopologySpec::explicit_graph(
        require(obj, "topology", "n_cells").get<std::uint32_t>(),
        std::move(edges));
    spec.p_x2 = obj.value("p_x2", 1.0);
    return spec;
  }
  config_error("topology.kind: expected grid, community, or explicit, got '" +
               kind + "'");
}

MobilityModel parse_mobility(const json& obj, const std::string& base_dir) {
  if (!obj.is_object()) config_error("mobility: expected an object");
  std::string kind = require(obj, "mobility", "kind").get<std::string>();
  if (kind == "random_walk") {
    check_keys(obj, "mobility", {"kind", "p_move"});
    return MobilityModel::random_walk(obj.value("p_move", 0.5));
  }
  if (kind == "community_flow") {
    check_keys(obj, "mobility", {"kind", "q", "p_move"});
    return MobilityModel::community_flow(
        require(obj, "mobility", "q").get<double>(), obj.value("p_move", 0.5));
  }
  if (kind == "trace") {
    check_keys(obj, "mobility", {"kind", "path"});
    return MobilityModel::trace(
        resolve(require(obj, "mobility", "path").get<std::string>(), base_dir));
  }
  config_error(
      "mobility.kind: expected random_walk, community_flow, or trace, got '" +
      kind + "'");
}

Scenario parse_object(const json& doc, const std::string& base_dir) {
  check_keys(doc, "scenario",
             {"topology", "mobility", "n_ues", "n_events", "regions",
              "init_policy", "pinned_assignment", "agent", "cost",
              "scale_events", "mode", "seed", "window", "record"});
  Scenario sc;
  sc.topology = parse_topology(require(doc, "scenario", "topology"), base_dir);
  sc.mobility = parse_mobility(require(doc, "scenario", "mobility"), base_dir);
  if (sc.mobility.kind == MobilityModel::Kind::Trace) {
    sc.n_ues = doc.value("n_ues", 1u);
    sc.n_events = doc.value("n_events", std::uint64_t{0});
  } else {
    sc.n_ues = require(doc, "scenario", "n_ues").get<std::uint32_t>();
    sc.n_events = require(doc, "scenario", "n_events").get<std::uint64_t>();
  }

  const json& regions = require(doc, "scenario", "regions");
  check_keys(regions, "regions", {"count", "capacity", "capacities"});
  if (regions.contains("capacities")) {
    if (regions.contains("count") || regions.contains("capacity")) {
      config_error("regions: 'capacities' excludes 'count'/'capacity'");
    }
    sc.initial_capacities =
        regions["capacities"].get<std::vector<double>>();
  } else {
    std::uint32_t count = require(regions, "regions", "count").get<std::uint32_t>();
    double capacity = require(regions, "regions", "capacity").get<double>();
    sc.initial_capacities.assign(count, capacity);
  }

  std::string policy = doc.value("init_policy", std::string("random"));
  if (policy == "random") {
    sc.init_policy = InitPolicy::Random;
  } else if (policy == "neighbor_majority") {
    sc.init_policy = InitPolicy::NeighborMajority;
  } else if (policy == "static") {
    sc.init_policy = InitPolicy::Static;
  } else if (policy == "pinned") {
    sc.init_policy = InitPolicy::Pinned;
  } else {
    config_error("init_policy: unknown policy '" + policy + "'");
  }
  if (doc.contains("pinned_assignment")) {
    sc.pinned_assignment =
        doc["pinned_assignment"].get<std::vector<RegionId>>();
  }

  if (doc.contains("agent")) {
    const json& agent = doc["agent"];
    check_keys(agent, "agent",
               {"k", "gamma", "epsilon", "delta", "refresh_interval",
                "cell_load"});
    sc.agent.k = agent.value("k", 1u);
    sc.agent.gamma = agent.value("gamma", 0.995);
    sc.agent.epsilon = agent.value("epsilon", 0.05);
    sc.delta = agent.value("delta", 0.05);
    sc.agent.refresh_interval = agent.value("refresh_interval", 100u);
    std::string load_mode = agent.value("cell_load", std::string("uniform"));
    if (load_mode == "uniform") {
      sc.load_mode = CellLoadMode::Uniform;
    } else if (load_mode == "arrival_rate") {
      sc.load_mode = CellLoadMode::ArrivalRate;
    } else {
      config_error("agent.cell_load: expected uniform or arrival_rate");
    }
  }

  if (doc.contains("cost")) {
    const json& cost = doc["cost"];
    check_keys(cost, "cost",
               {"x2", "s1_intra", "s1_inter", "assignment_change"});
    sc.cost.msgs_x2 = cost.value("x2", 8u);
    sc.cost.msgs_s1_intra = cost.value("s1_intra", 12u);
    sc.cost.msgs_s1_inter = cost.value("s1_inter", 18u);
    sc.cost.msgs_assignment_change = cost.value("assignment_change", 2u);
  }

  if (doc.contains("scale_events")) {
    for (const auto& ev : doc["scale_events"]) {
      check_keys(ev, "scale_events[]", {"time", "kind", "capacity", "region"});
      ScaleEvent se;
      se.time = require(ev, "scale_events[]", "time").get<std::uint64_t>();
      std::string kind = require(ev, "scale_events[]", "kind").get<std::string>();
      if (kind == "up") {
        se.kind = ScaleEvent::Kind::Up;
        se.capacity = require(ev, "scale_events[]", "capacity").get<double>();
        if (ev.contains("region")) {
          config_error("scale_events[]: 'up' does not take 'region'");
        }
      } else if (kind == "down") {
        se.kind = ScaleEvent::Kind::Down;
        se.region = require(ev, "scale_events[]", "region").get<RegionId>();
        if (ev.contains("capacity")) {
          config_error("scale_events[]: 'down' does not take 'capacity'");
        }
      } else {
        config_error("scale_events[].kind: expected up or down");
      }
      sc.scale_events.push_back(se);
    }
  }

  std::string mode = doc.value("mode", std::string("active"));
  if (mode == "active") {
    sc.mode = AlgorithmMode::Active;
  } else if (mode == "frozen") {
    sc.mode = AlgorithmMode::Frozen;
  } else {
    config_error("mode: expected active or frozen");
  }

  sc.seed = require(doc, "scenario", "seed").get<std::uint64_t>();
  sc.window = doc.value("window", 500u);

  if (doc.contains("record")) {
    const json& record = doc["record"];
    check_keys(record, "record", {"messages", "flow"});
    sc.record.messages = record.value("messages", false);
    sc.record.flow = record.value("flow", true);
  }
  return sc;
}

std::uint32_t expected_cell_count(const TopologySpec& spec) {
  switch (spec.kind) {
    case TopologySpec::Kind::Grid: return spec.width * spec.height;
    case TopologySpec::Kind::Community:
      return spec.n_communities * spec.cells_per_community;
    case TopologySpec::Kind::Explicit: return spec.n_cells;
  }
  return 0;
}

ordered_json topology_json(const TopologySpec& spec) {
  ordered_json j;
  switch (spec.kind) {
    case TopologySpec::Kind::Grid:
      j["kind"] = "grid";
      j["width"] = spec.width;
      j["height"] = spec.height;
      break;
    case TopologySpec::Kind::Community:
      j["kind"] = "community";
      j["n_communities"] = spec.n_communities;
      j["cells_per_community"] = spec.cells_per_community;
      j["inter_edges"] = spec.inter_edges;
      break;
    case TopologySpec::Kind::Explicit: {
      j["kind"] = "explicit";
      j["n_cells"] = spec.n_cells;
      ordered_json edges = ordered_json::array();
      for (const auto& e : spec.edges) {
        ordered_json edge = ordered_json::array({e.a, e.b});
        if (e.direct.has_value()) {
          edge.push_back(*e.direct ? "direct" : "s1only");
        }
        edges.push_back(edge);
      }
      j["edges"] = edges;
      break;
    }
  }
  j["p_x2"] = spec.p_x2;
  return j;
}

ordered_json mobility_json(const MobilityModel& model) {
  ordered_json j;
  switch (model.kind) {
    case MobilityModel::Kind::RandomWalk:
      j["kind"] = "random_walk";
      j["p_move"] = model.p_move;
      break;
    case MobilityModel::Kind::CommunityFlow:
      j["kind"] = "community_flow";
      j["q"] = model.q;
      j["p_move"] = model.p_move;
      break;
    case MobilityModel::Kind::Trace:
      j["kind"] = "trace";
      j["path"] = model.trace_path;
      break;
  }
  return j;
}

ordered_json scenario_json(const Scenario& sc) {
  ordered_json j;
  j["topology"] = topology_json(sc.topology);
  j["mobility"] = mobility_json(sc.mobility);
  j["n_ues"] = sc.n_ues;
  j["n_events"] = sc.n_events;
  j["regions"]["capacities"] = sc.initial_capacities;
  switch (sc.init_policy) {
    case InitPolicy::Random: j["init_policy"] = "random"; break;
    case InitPolicy::NeighborMajority:
      j["init_policy"] = "neighbor_majority";
      break;
    case InitPolicy::Static: j["init_policy"] = "static"; break;
    case InitPolicy::Pinned: j["init_policy"] = "pinned"; break;
  }
  if (sc.init_policy == InitPolicy::Pinned) {
    j["pinned_assignment"] = sc.pinned_assignment;
  }
  j["agent"]["k"] = sc.agent.k;
  j["agent"]["gamma"] = sc.agent.gamma;
  j["agent"]["epsilon"] = sc.agent.epsilon;
  j["agent"]["delta"] = sc.delta;
  j["agent"]["refresh_interval"] = sc.agent.refresh_interval;
  j["agent"]["cell_load"] =
      sc.load_mode == CellLoadMode::Uniform ? "uniform" : "arrival_rate";
  j["cost"]["x2"] = sc.cost.msgs_x2;
  j["cost"]["s1_intra"] = sc.cost.msgs_s1_intra;
  j["cost"]["s1_inter"] = sc.cost.msgs_s1_inter;
  j["cost"]["assignment_change"] = sc.cost.msgs_assignment_change;
  ordered_json scale = ordered_json::array();
  for (const auto& ev : sc.scale_events) {
    ordered_json e;
    e["time"] = ev.time;
    if (ev.kind == ScaleEvent::Kind::Up) {
      e["kind"] = "up";
      e["capacity"] = ev.capacity;
    } else {
      e["kind"] = "down";
      e["region"] = ev.region;
    }
    scale.push_back(e);
  }
  j["scale_events"] = scale;
  j["mode"] = sc.mode == AlgorithmMode::Active ? "active" : "frozen";
  j["seed"] = sc.seed;
  j["window"] = sc.window;
  j["record"]["messages"] = sc.record.messages;
  j["record"]["flow"] = sc.record.flow;
  return j;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SimError(ErrorCode::ParseError,
                   std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) config_error("scenario root must be a JSON object");
  try {
    Scenario sc = parse_object(doc, "");
    validate_scenario(sc);
    return sc;
  } catch (const json::exception& e) {
    config_error(std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw SimError(ErrorCode::IoError, "cannot open scenario: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw SimError(ErrorCode::ParseError,
                   path + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) config_error("scenario root must be a JSON object");
  std::string base_dir = std::filesystem::path(path).parent_path().string();
  try {
    Scenario sc = parse_object(doc, base_dir);
    validate_scenario(sc);
    return sc;
  } catch (const json::exception& e) {
    config_error(std::string("scenario: ") + e.what());
  }
}

void validate_scenario(const Scenario& sc) {
  const std::uint32_t n_cells = expected_cell_count(sc.topology);
  if (n_cells == 0) config_error("topology yields zero cells");
  if (sc.topology.p_x2 < 0.0 || sc.topology.p_x2 > 1.0) {
    config_error("topology.p_x2 must lie in [0, 1]");
  }

  if (sc.mobility.kind != MobilityModel::Kind::Trace) {
    if (sc.n_ues == 0) config_error("n_ues must be at least 1");
    if (sc.mobility.p_move <= 0.0 || sc.mobility.p_move > 1.0) {
      config_error("mobility.p_move must lie in (0, 1]");
    }
  }
  if (sc.mobility.kind == MobilityModel::Kind::CommunityFlow) {
    if (sc.mobility.q <= 0.0 || sc.mobility.q > 1.0) {
      config_error("mobility.q must lie in (0, 1]");
    }
    if (sc.topology.kind != TopologySpec::Kind::Community) {
      config_error("community_flow mobility requires a community topology");
    }
  }

  if (sc.initial_capacities.empty()) {
    config_error("regions: need at least one initial region");
  }
  double cap_sum = 0.0;
  for (double c : sc.initial_capacities) {
    if (c <= 0.0) config_error("regions: capacities must be positive");
    cap_sum += c;
  }
  if (sc.agent.k == 0) config_error("agent.k must be at least 1");
  if (sc.agent.k > sc.initial_capacities.size()) {
    config_error("agent.k exceeds the initial region count");
  }
  if (sc.load_mode == CellLoadMode::Uniform &&
      cap_sum < static_cast<double>(sc.agent.k) * n_cells) {
    config_error("regions: capacities sum to " + std::to_string(cap_sum) +
                 ", below k * n_cells = " +
                 std::to_string(sc.agent.k * n_cells));
  }
  if (sc.agent.gamma <= 0.0 || sc.agent.gamma > 1.0) {
    config_error("agent.gamma must lie in (0, 1]");
  }
  if (sc.agent.epsilon < 0.0) config_error("agent.epsilon must be >= 0");
  if (sc.delta < 0.0) config_error("agent.delta must be >= 0");
  if (sc.agent.refresh_interval == 0) {
    config_error("agent.refresh_interval must be at least 1");
  }
  if (sc.cost.msgs_x2 == 0 || sc.cost.msgs_s1_intra == 0 ||
      sc.cost.msgs_s1_inter == 0 || sc.cost.msgs_assignment_change == 0) {
    config_error("cost: message counts must be positive");
  }
  if (sc.window == 0) config_error("window must be at least 1");

  if (sc.init_policy == InitPolicy::Pinned) {
    if (sc.pinned_assignment.size() != n_cells) {
      config_error("pinned_assignment must list exactly one region per cell");
    }
    if (sc.agent.k != 1) {
      config_error("pinned init requires k = 1");
    }
    std::vector<double> load(sc.initial_capacities.size(), 0.0);
    for (RegionId r : sc.pinned_assignment) {
      if (r >= sc.initial_capacities.size()) {
        config_error("pinned_assignment references unknown region " +
                     std::to_string(r));
      }
      load[r] += 1.0;
    }
    for (std::size_t r = 0; r < load.size(); ++r) {
      if (load[r] > sc.initial_capacities[r]) {
        config_error("pinned_assignment overfills region " +
                     std::to_string(r));
      }
    }
  } else if (!sc.pinned_assignment.empty()) {
    config_error("pinned_assignment requires init_policy = pinned");
  }

  // Replay the scale schedule against the directory it will produce.
  std::set<RegionId> live;
  RegionId next_id = 0;
  for (; next_id < sc.initial_capacities.size(); ++next_id) {
    live.insert(next_id);
  }
  std::uint64_t prev_time = 0;
  bool first = true;
  for (const auto& ev : sc.scale_events) {
    if (!first && ev.time < prev_time) {
      config_error("scale_events must be ordered by time");
    }
    first = false;
    prev_time = ev.time;
    if (ev.kind == ScaleEvent::Kind::Up) {
      if (ev.capacity <= 0.0) {
        config_error("scale_events: up capacity must be positive");
      }
      live.insert(next_id++);
    } else {
      if (!live.count(ev.region)) {
        config_error("scale_events: region " + std::to_string(ev.region) +
                     " is not live at time " + std::to_string(ev.time));
      }
      if (live.size() == 1) {
        config_error("scale_events: cannot retire the last live region");
      }
      live.erase(ev.region);
    }
  }
}

std::string scenario_to_canonical_json(const Scenario& sc) {
  return scenario_json(sc).dump();
}

std::string scenario_digest(const Scenario& sc) {
  ordered_json j = scenario_json(sc);
  j.erase("seed");
  std::uint64_t h = Rng::fnv1a(j.dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace regionsim
