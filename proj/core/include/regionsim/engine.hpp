#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "regionsim/agents.hpp"
#include "regionsim/assignment.hpp"
#include "regionsim/directory.hpp"
#include "regionsim/evaluation.hpp"
#include "regionsim/mobility.hpp"
#include "regionsim/protocol.hpp"
#include "regionsim/scenario.hpp"
#include "regionsim/topology.hpp"

namespace regionsim {

/// Deals cells to the live regions. random: shuffled round-robin skipping
/// full regions (a region is full at capacity, inclusive). neighbor_majority:
/// ascending cell id, join the region most common among already-assigned
/// neighbors with room (ties by ascending region id), falling back to a
/// uniform draw over non-full regions. static: geographic baseline
/// partition. pinned: the scenario's explicit per-cell region vector.
AssignmentState init_assignment(InitPolicy policy, const Topology& topo,
                                const RegionDirectory& directory,
                                std::uint32_t k, Rng& rng,
                                const std::vector<RegionId>& pinned = {});

/// Everything a finished run exposes: per-window metrics plus whole-run
/// totals and final state snapshots.
struct RunResult {
  std::vector<WindowMetrics> windows;

  std::uint64_t events = 0;
  std::uint64_t x2 = 0;
  std::uint64_t s1_intra = 0;
  std::uint64_t s1_inter = 0;
  double handover_signaling = 0.0;
  double assignment_signaling = 0.0;
  std::map<MessageKind, std::uint64_t> message_counts;
  std::uint64_t switches = 0;            // accepted membership changes
  std::uint64_t forced_assignments = 0;  // capacity-waived fallbacks
  std::uint64_t dropped_memberships = 0; // k not restorable (k > live)
  std::uint64_t agent_errors = 0;        // logged, never fatal

  std::vector<RegionId> final_primary;   // partition by primary region
  std::map<RegionId, double> final_loads;
  std::map<RegionId, double> final_capacities;
  std::optional<FlowMatrix> flow;
  std::vector<MessageLogEntry> messages;  // when record.messages

  double total_signaling() const {
    return handover_signaling + assignment_signaling;
  }
  double overall_ratio() const {
    return events == 0 ? 0.0 : static_cast<double>(s1_inter) / events;
  }
};

/// Single-threaded deterministic event loop. Owns the topology, the
/// directory, one agent per cell and per live region, and the assignment
/// state; every event is processed atomically.
class Engine {
 public:
  Engine(Topology topo, const Scenario& scenario);

  /// Classification, counter update, optional attraction refresh, the
  /// cell's assignment decision, and any eviction cascades, in that order.
  /// Frozen mode stops after the counter update.
  void process_event(const HandoverEvent& event);

  /// ScaleUp adds an empty region (assignment untouched); ScaleDown
  /// retires one and walks every cell it held through reassignment.
  void apply_scale_event(const ScaleEvent& ev);

  /// Flushes a trailing partial metrics window.
  void finish();

  const Topology& topology() const { return topo_; }
  const RegionDirectory& directory() const { return directory_; }
  const AssignmentState& assignment() const { return assignment_; }
  const CellAgent& cell_agent(CellId cell) const;
  const MmeAgent& mme_agent(RegionId region) const;
  std::uint64_t clock() const { return clock_; }
  const RunResult& result() const { return result_; }
  RunResult take_result() &&;

 private:
  RegionId derive_region_for(const HandoverEvent& event, HandoverClass cls);
  void log_message(MessageLogEntry entry);
  void deliver_request(CellId cell, const AssignmentRequest& request);
  void handle_eviction(CellId evicted, RegionId evictor, std::size_t budget);
  bool walk_candidates(CellId cell, const std::vector<RegionId>& candidates,
                       std::size_t budget);
  void forced_assignment(CellId cell, RegionId excluded);
  void complete_join(CellId cell, RegionId region);
  void refresh_if_due(CellId cell);
  void recompute_primary(CellId cell);
  UeHistory& ensure_history(UeId ue);
  double cell_load(CellId cell) const;
  std::map<RegionId, double> region_loads() const;
  void maybe_flush_window();
  void flush_window();

  Topology topo_;
  Scenario scenario_;
  RegionDirectory directory_;
  AssignmentState assignment_;
  std::vector<CellAgent> cells_;
  std::map<RegionId, MmeAgent> mmes_;
  std::vector<UeHistory> ue_history_;
  std::uint64_t clock_ = 0;

  std::vector<EventRecord> window_events_;
  std::uint32_t cur_assignment_msgs_ = 0;
  bool finished_ = false;
  RunResult result_;
};

/// Builds the topology, synthesizes or loads the event stream, interleaves
/// scale events (scale first on equal time), and processes everything.
/// Fully deterministic in (scenario, seed).
RunResult run_scenario(const Scenario& scenario);

}  // namespace regionsim
