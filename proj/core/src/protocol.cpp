#include "regionsim/protocol.hpp"

#include <sstream>

namespace regionsim {

void UeHistory::push(CellId cell) {
  visited.insert(visited.begin(), cell);
  if (visited.size() > kUeHistoryDepth) visited.resize(kUeHistoryDepth);
}

Guti encode_guti(RegionId region, std::uint64_t m_tmsi) {
  return Guti{region, m_tmsi};
}

std::pair<RegionId, std::uint64_t> decode_guti(const Guti& guti) {
  return {guti.gummei, guti.m_tmsi};
}

std::uint32_t signaling_cost(HandoverClass cls,
                             const SignalingCostModel& model) {
  switch (cls) {
    case HandoverClass::X2: return model.msgs_x2;
    case HandoverClass::S1IntraRegion: return model.msgs_s1_intra;
    case HandoverClass::S1InterRegion: return model.msgs_s1_inter;
  }
  return 0;
}

std::string MessageLogEntry::csv_row() const {
  std::ostringstream out;
  out << time << ',' << to_string(kind) << ',';
  if (ue != kNoUe) out << ue;
  out << ',';
  if (source != kNoCell) out << source;
  out << ',';
  if (target != kNoCell) out << target;
  out << ',';
  if (source_region != kNoRegion) out << source_region;
  out << ',';
  if (target_region != kNoRegion) out << target_region;
  out << ',';
  if (has_class) out << to_string(cls);
  return out.str();
}

HandoverClass classify_handover(CellId source, CellId target,
                                const AssignmentState& assignment,
                                const Topology& topo) {
  if (!topo.adjacent(source, target)) {
    throw SimError(ErrorCode::NonAdjacentHandover,
                   "cells " + std::to_string(source) + " and " +
                       std::to_string(target) + " are not adjacent");
  }
  RegionId rs = assignment.primary_of(source);
  RegionId rt = assignment.primary_of(target);
  if (rs != rt) return HandoverClass::S1InterRegion;
  return topo.has_direct_link(source, target) ? HandoverClass::X2
                                              : HandoverClass::S1IntraRegion;
}

RegionId derive_source_region(const HandoverRequestMsg& msg,
                              const AssignmentState& assignment) {
  return assignment.primary_of(msg.target_cell);
}

RegionId derive_source_region(const TauRequestMsg& msg,
                              const RegionDirectory& directory) {
  RegionId region = msg.old_guti.gummei;
  if (!directory.is_live(region)) {
    throw SimError(ErrorCode::RetiredRegion,
                   "GUMMEI " + std::to_string(region) +
                       " does not name a live region");
  }
  return region;
}

}  // namespace regionsim
