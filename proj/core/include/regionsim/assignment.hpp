#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "regionsim/types.hpp"

namespace regionsim {

/// Authoritative cell-side view of the cell->region association. Each cell
/// holds a sorted set of member regions plus a designated primary (the
/// region that issues its GUTIs). Region-side membership lives in the MME
/// agents; the engine keeps both in sync.
class AssignmentState {
 public:
  AssignmentState() = default;
  AssignmentState(std::uint32_t n_cells, std::uint32_t k)
      : k_(k),
        members_(n_cells),
        primary_(n_cells, kNoRegion) {}

  std::uint32_t cell_count() const {
    return static_cast<std::uint32_t>(members_.size());
  }
  std::uint32_t k() const { return k_; }

  const std::vector<RegionId>& regions_of(CellId cell) const {
    check(cell);
    return members_[cell];
  }

  RegionId primary_of(CellId cell) const {
    check(cell);
    if (primary_[cell] == kNoRegion) {
      throw SimError(ErrorCode::UnassignedCell,
                     "cell " + std::to_string(cell) + " has no primary region");
    }
    return primary_[cell];
  }

  bool is_member(CellId cell, RegionId region) const {
    check(cell);
    const auto& m = members_[cell];
    return std::binary_search(m.begin(), m.end(), region);
  }

  void join(CellId cell, RegionId region) {
    check(cell);
    auto& m = members_[cell];
    auto it = std::lower_bound(m.begin(), m.end(), region);
    if (it != m.end() && *it == region) {
      throw SimError(ErrorCode::NotAssigned,
                     "cell " + std::to_string(cell) + " already in region " +
                         std::to_string(region));
    }
    m.insert(it, region);
    if (primary_[cell] == kNoRegion) primary_[cell] = region;
  }

  void leave(CellId cell, RegionId region) {
    check(cell);
    auto& m = members_[cell];
    auto it = std::lower_bound(m.begin(), m.end(), region);
    if (it == m.end() || *it != region) {
      throw SimError(ErrorCode::NotAssigned,
                     "cell " + std::to_string(cell) + " not in region " +
                         std::to_string(region));
    }
    m.erase(it);
    if (primary_[cell] == region) {
      primary_[cell] = m.empty() ? kNoRegion : m.front();
    }
  }

  void set_primary(CellId cell, RegionId region) {
    if (!is_member(cell, region)) {
      throw SimError(ErrorCode::NotAssigned,
                     "primary " + std::to_string(region) +
                         " is not a member region of cell " +
                         std::to_string(cell));
    }
    primary_[cell] = region;
  }

  /// Primary region per cell, indexed by cell id.
  std::vector<RegionId> primary_vector() const { return primary_; }

 private:
  void check(CellId cell) const {
    if (cell >= members_.size()) {
      throw SimError(ErrorCode::UnknownCell,
                     "cell " + std::to_string(cell) + " out of range");
    }
  }

  std::uint32_t k_ = 1;
  std::vector<std::vector<RegionId>> members_;
  std::vector<RegionId> primary_;
};

}  // namespace regionsim
