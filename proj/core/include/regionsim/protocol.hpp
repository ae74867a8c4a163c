#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regionsim/assignment.hpp"
#include "regionsim/directory.hpp"
#include "regionsim/topology.hpp"
#include "regionsim/types.hpp"

namespace regionsim {

/// Depth of the UE History Information list carried in handover requests.
inline constexpr std::size_t kUeHistoryDepth = 16;

/// Last visited cells, most recent first.
struct UeHistory {
  std::vector<CellId> visited;

  /// Prepends a cell and truncates to kUeHistoryDepth.
  void push(CellId cell);
};

struct Guti {
  RegionId gummei = kNoRegion;  // identifies the allocating region instance
  std::uint64_t m_tmsi = 0;
};

Guti encode_guti(RegionId region, std::uint64_t m_tmsi);
std::pair<RegionId, std::uint64_t> decode_guti(const Guti& guti);

struct HandoverRequestMsg {
  UeId ue = 0;
  CellId source_cell = 0;
  CellId target_cell = 0;
  UeHistory history;  // history.visited[0] == source_cell
};

/// Follows an inter-region handover; old_guti points at the source region.
struct TauRequestMsg {
  UeId ue = 0;
  Guti old_guti;
  CellId cell = 0;
};

enum class HandoverClass { X2, S1IntraRegion, S1InterRegion };

inline const char* to_string(HandoverClass cls) {
  switch (cls) {
    case HandoverClass::X2: return "x2";
    case HandoverClass::S1IntraRegion: return "s1_intra";
    case HandoverClass::S1InterRegion: return "s1_inter";
  }
  return "?";
}

/// Message counts per handover class plus the per-exchange cost of
/// assignment traffic (request + response = msgs_assignment_change, so a
/// single logged assignment message costs half of it).
struct SignalingCostModel {
  std::uint32_t msgs_x2 = 8;
  std::uint32_t msgs_s1_intra = 12;
  std::uint32_t msgs_s1_inter = 18;
  std::uint32_t msgs_assignment_change = 2;
};

std::uint32_t signaling_cost(HandoverClass cls, const SignalingCostModel& model);

enum class MessageKind { HoReq, TauReq, AssignReq, AssignRsp, ReassignReq };

inline const char* to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::HoReq: return "HO_REQ";
    case MessageKind::TauReq: return "TAU_REQ";
    case MessageKind::AssignReq: return "ASSIGN_REQ";
    case MessageKind::AssignRsp: return "ASSIGN_RSP";
    case MessageKind::ReassignReq: return "REASSIGN_REQ";
  }
  return "?";
}

/// One row of the optional message log. Sentinel ids (kNoCell / kNoRegion /
/// kNoUe) render as empty CSV fields.
struct MessageLogEntry {
  std::uint64_t time = 0;
  MessageKind kind = MessageKind::HoReq;
  UeId ue = kNoUe;
  CellId source = kNoCell;
  CellId target = kNoCell;
  RegionId source_region = kNoRegion;
  RegionId target_region = kNoRegion;
  bool has_class = false;
  HandoverClass cls = HandoverClass::X2;

  std::string csv_row() const;
};

inline constexpr const char* kMessageCsvHeader =
    "time,kind,ue,source,target,source_region,target_region,class";

/// Taxonomy: different primary regions -> S1 inter-region; same region with
/// a direct link -> X2; same region without one -> S1 intra-region.
HandoverClass classify_handover(CellId source, CellId target,
                                const AssignmentState& assignment,
                                const Topology& topo);

/// Intra-region case: the source region equals the target cell's own
/// primary (the UE history identifies the source cell, whose MME is ours).
RegionId derive_source_region(const HandoverRequestMsg& msg,
                              const AssignmentState& assignment);

/// Inter-region case: the old GUTI's GUMMEI names the source region.
/// Throws RetiredRegion when it references a scaled-down or unknown
/// instance; callers bucket that counter as a tombstone.
RegionId derive_source_region(const TauRequestMsg& msg,
                              const RegionDirectory& directory);

}  // namespace regionsim
