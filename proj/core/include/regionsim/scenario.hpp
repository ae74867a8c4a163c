#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regionsim/agents.hpp"
#include "regionsim/mobility.hpp"
#include "regionsim/protocol.hpp"
#include "regionsim/topology.hpp"

namespace regionsim {

enum class AlgorithmMode { Active, Frozen };
enum class InitPolicy { Random, NeighborMajority, Static, Pinned };
enum class CellLoadMode { Uniform, ArrivalRate };

struct ScaleEvent {
  enum class Kind { Up, Down };
  std::uint64_t time = 0;  // fires before the mobility event of equal index
  Kind kind = Kind::Up;
  double capacity = 0.0;      // Up: capacity of the new region
  RegionId region = kNoRegion;  // Down: region to retire
};

struct RecordOptions {
  bool messages = false;
  bool flow = true;
};

/// Complete, self-contained description of one simulation run. JSON
/// serializable; unknown keys are rejected on load.
struct Scenario {
  TopologySpec topology;
  MobilityModel mobility;
  std::uint32_t n_ues = 1;
  std::uint64_t n_events = 0;
  std::vector<double> initial_capacities;  // one region per entry, ids 0..
  InitPolicy init_policy = InitPolicy::Random;
  std::vector<RegionId> pinned_assignment;  // InitPolicy::Pinned only
  CellAgentParams agent;
  double delta = 0.05;  // MME eviction hysteresis
  CellLoadMode load_mode = CellLoadMode::Uniform;
  SignalingCostModel cost;
  std::vector<ScaleEvent> scale_events;  // ascending time
  AlgorithmMode mode = AlgorithmMode::Active;
  std::uint64_t seed = 0;
  std::uint32_t window = 500;  // metrics window W, in events
  RecordOptions record;
};

/// Parses and validates a scenario JSON document. Structural problems
/// (bad JSON) raise ParseError; semantic ones (unknown key, bad value,
/// infeasible combination) raise ConfigError naming the offending field.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

/// Semantic checks shared by parse and by programmatic construction:
/// capacities vs cell count, mobility/topology compatibility, scale event
/// ordering and liveness, pinned assignment shape.
void validate_scenario(const Scenario& scenario);

/// Canonical JSON rendering with a fixed key order; the digest input.
std::string scenario_to_canonical_json(const Scenario& scenario);

/// FNV-1a 64 hash of the canonical form with the seed field omitted, as a
/// 16-digit hex string, so sweep runs over seeds share one digest.
std::string scenario_digest(const Scenario& scenario);

}  // namespace regionsim
