#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regionsim/rng.hpp"
#include "regionsim/topology.hpp"
#include "regionsim/types.hpp"

namespace regionsim {

/// One UE crossing a cell boundary. Logical time is the event index.
struct HandoverEvent {
  std::uint64_t time = 0;
  UeId ue = 0;
  CellId source = 0;
  CellId target = 0;
};

struct MobilityModel {
  enum class Kind { RandomWalk, CommunityFlow, Trace };

  Kind kind = Kind::RandomWalk;
  double p_move = 0.5;      // probability a stepped UE moves at all
  double q = 0.95;          // community_flow: within-community move probability
  std::string trace_path;

  static MobilityModel random_walk(double p_move = 0.5);
  static MobilityModel community_flow(double q, double p_move = 0.5);
  static MobilityModel trace(std::string path);
};

/// Aggregated directed handover counts; edge weights for the partition
/// oracle. Dense storage, indexed [source][target].
class FlowMatrix {
 public:
  FlowMatrix() = default;
  explicit FlowMatrix(std::uint32_t n_cells)
      : n_(n_cells), counts_(static_cast<std::size_t>(n_cells) * n_cells, 0.0) {}

  std::uint32_t size() const { return n_; }
  double at(CellId i, CellId j) const { return counts_[idx(i, j)]; }
  void add(CellId i, CellId j, double w = 1.0) { counts_[idx(i, j)] += w; }
  double total() const;

  void save_csv(const std::string& path) const;
  /// Dimension is max referenced id + 1 unless a larger hint is given.
  static FlowMatrix load_csv(const std::string& path, std::uint32_t n_hint = 0);

 private:
  std::size_t idx(CellId i, CellId j) const {
    if (i >= n_ || j >= n_) {
      throw SimError(ErrorCode::UnknownCell,
                     "flow index out of range: (" + std::to_string(i) + ", " +
                         std::to_string(j) + ")");
    }
    return static_cast<std::size_t>(i) * n_ + j;
  }

  std::uint32_t n_ = 0;
  std::vector<double> counts_;
};

/// Advances one UE by one tick; nullopt means the UE stayed put.
std::optional<CellId> step_ue(const MobilityModel& model, const Topology& topo,
                              CellId current, Rng& rng);

/// Synthesizes exactly n_events boundary crossings. UEs start uniformly at
/// random; each tick steps one uniformly chosen UE; Stay outcomes do not
/// consume an event index.
std::vector<HandoverEvent> generate_handovers(const MobilityModel& model,
                                              const Topology& topo,
                                              std::uint32_t n_ues,
                                              std::uint64_t n_events, Rng& rng);

/// Replays a trace CSV ("time,ue,source,target"), validating every row
/// against the topology. Throws ParseError / NonAdjacentHandover with the
/// offending line number.
std::vector<HandoverEvent> load_trace(const std::string& path,
                                      const Topology& topo);

FlowMatrix flow_matrix(const std::vector<HandoverEvent>& events,
                       std::uint32_t n_cells);

}  // namespace regionsim
