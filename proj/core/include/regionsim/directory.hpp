#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "regionsim/types.hpp"

namespace regionsim {

/// Registry of region (MME/AMF) instances. Ids are allocated monotonically
/// and never reused; retiring keeps the id known so stale GUTI lookups can
/// be distinguished from garbage.
class RegionDirectory {
 public:
  RegionId create_region(double capacity) {
    RegionId id = next_id_++;
    live_.emplace(id, capacity);
    return id;
  }

  /// Throws LastRegion rather than retiring the only live instance,
  /// RetiredRegion when the id is unknown or already retired.
  void retire(RegionId region) {
    auto it = live_.find(region);
    if (it == live_.end()) {
      throw SimError(ErrorCode::RetiredRegion,
                     "region " + std::to_string(region) + " is not live");
    }
    if (live_.size() == 1) {
      throw SimError(ErrorCode::LastRegion,
                     "refusing to retire the only live region");
    }
    live_.erase(it);
    retired_.insert(region);
  }

  bool is_live(RegionId region) const { return live_.count(region) != 0; }
  bool is_retired(RegionId region) const { return retired_.count(region) != 0; }
  bool is_known(RegionId region) const {
    return is_live(region) || is_retired(region);
  }

  double capacity_of(RegionId region) const {
    auto it = live_.find(region);
    if (it == live_.end()) {
      throw SimError(ErrorCode::RetiredRegion,
                     "region " + std::to_string(region) + " is not live");
    }
    return it->second;
  }

  /// Live id -> capacity, ascending id order.
  const std::map<RegionId, double>& live() const { return live_; }
  std::size_t live_count() const { return live_.size(); }

  std::vector<RegionId> live_ids() const {
    std::vector<RegionId> ids;
    ids.reserve(live_.size());
    for (const auto& [id, cap] : live_) {
      (void)cap;
      ids.push_back(id);
    }
    return ids;
  }

  const std::set<RegionId>& retired() const { return retired_; }

 private:
  RegionId next_id_ = 0;
  std::map<RegionId, double> live_;
  std::set<RegionId> retired_;
};

}  // namespace regionsim
