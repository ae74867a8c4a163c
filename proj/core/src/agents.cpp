#include "regionsim/agents.hpp"

#include <algorithm>
#include <cassert>
#include <string>

namespace regionsim {

namespace {
// Counters decayed below this are dropped; keeps tables bounded by the set
// of regions with recent flow.
constexpr double kCounterFloor = 1e-12;
}  // namespace

AttractionTable::AttractionTable(double decay) : decay_(decay) {
  if (decay <= 0.0 || decay > 1.0) {
    throw SimError(ErrorCode::ConfigError, "decay must lie in (0, 1]");
  }
}

AttractionTable::AttractionTable(double decay,
                                 std::map<RegionId, double> counters)
    : AttractionTable(decay) {
  for (const auto& [region, value] : counters) {
    (void)region;
    if (value < 0.0) {
      throw SimError(ErrorCode::ConfigError, "counters must be non-negative");
    }
  }
  counters_ = std::move(counters);
  recompute_total();
}

double AttractionTable::counter(RegionId region) const {
  auto it = counters_.find(region);
  return it == counters_.end() ? 0.0 : it->second;
}

void AttractionTable::record(RegionId source_region) {
  for (auto it = counters_.begin(); it != counters_.end();) {
    it->second *= decay_;
    if (it->second < kCounterFloor) {
      it = counters_.erase(it);
    } else {
      ++it;
    }
  }
  counters_[source_region] += 1.0;
  recompute_total();
}

void AttractionTable::recompute_total() {
  double sum = 0.0;
  for (const auto& [region, value] : counters_) {
    (void)region;
    sum += value;
  }
  total_ = sum;
}

CellAgent::CellAgent(CellId cell, CellAgentParams params)
    : cell_(cell), params_(params), table_(params.gamma) {
  if (params.k == 0) {
    throw SimError(ErrorCode::ConfigError, "k must be positive");
  }
  if (params.epsilon < 0.0) {
    throw SimError(ErrorCode::ConfigError, "epsilon must be non-negative");
  }
}

void CellAgent::record_handover(RegionId source_region) {
  table_.record(source_region);
  ++recorded_;
}

std::optional<AttractionVector> CellAgent::attraction(
    const RegionDirectory& directory) const {
  double live_sum = 0.0;
  for (const auto& [region, cap] : directory.live()) {
    (void)cap;
    live_sum += table_.counter(region);
  }
  if (live_sum <= 0.0) return std::nullopt;
  AttractionVector v;
  for (const auto& [region, cap] : directory.live()) {
    (void)cap;
    v.values[region] = table_.counter(region) / live_sum;
  }
  return v;
}

std::vector<AssignmentRequest> CellAgent::make_assignment_decision(
    const std::vector<RegionId>& current,
    const RegionDirectory& directory) const {
  auto maybe = attraction(directory);
  if (!maybe) return {};
  const AttractionVector& a = *maybe;

  std::vector<RegionId> ranked;
  ranked.reserve(a.values.size());
  for (const auto& [region, value] : a.values) {
    (void)value;
    ranked.push_back(region);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](RegionId lhs, RegionId rhs) {
                     double al = a.values.at(lhs);
                     double ar = a.values.at(rhs);
                     if (al != ar) return al > ar;
                     return lhs < rhs;
                   });
  const std::size_t top_k = std::min<std::size_t>(params_.k, ranked.size());

  std::vector<RegionId> incoming;  // top-k regions not yet members
  for (std::size_t i = 0; i < top_k; ++i) {
    RegionId r = ranked[i];
    if (!std::binary_search(current.begin(), current.end(), r)) {
      incoming.push_back(r);  // already in attraction-descending order
    }
  }
  if (incoming.empty()) return {};

  // Members outside the top set, weakest first, are the displacement
  // candidates; dead (non-live) members count as attraction 0.
  std::vector<RegionId> displaced;
  for (RegionId r : current) {
    bool in_top =
        std::find(ranked.begin(), ranked.begin() + top_k, r) !=
        ranked.begin() + top_k;
    if (!in_top) displaced.push_back(r);
  }
  std::stable_sort(displaced.begin(), displaced.end(),
                   [&](RegionId lhs, RegionId rhs) {
                     double al = a.value_or_zero(lhs);
                     double ar = a.value_or_zero(rhs);
                     if (al != ar) return al < ar;
                     return lhs < rhs;
                   });

  std::vector<AssignmentRequest> requests;
  for (std::size_t i = 0; i < incoming.size(); ++i) {
    AssignmentRequest req;
    req.target = incoming[i];
    req.attraction = a.values.at(incoming[i]);
    if (i < displaced.size()) {
      req.displaces = displaced[i];
      if (req.attraction - a.value_or_zero(displaced[i]) < params_.epsilon) {
        continue;  // hysteresis: not enough of an improvement
      }
    }
    requests.push_back(req);
  }
  return requests;
}

std::vector<RegionId> CellAgent::make_reassignment(
    RegionId excluded, const std::vector<RegionId>& current,
    const RegionDirectory& directory,
    const std::map<RegionId, double>& region_loads) const {
  bool any_other_live = false;
  for (const auto& [region, cap] : directory.live()) {
    (void)cap;
    if (region != excluded) {
      any_other_live = true;
      break;
    }
  }
  if (!any_other_live) {
    throw SimError(ErrorCode::NoCandidate,
                   "no live region besides " + std::to_string(excluded));
  }

  auto maybe = attraction(directory);
  std::vector<RegionId> positive;
  std::vector<RegionId> cold;  // no data or zero attraction
  for (const auto& [region, cap] : directory.live()) {
    (void)cap;
    if (region == excluded) continue;
    if (std::binary_search(current.begin(), current.end(), region)) {
      continue;  // already a member elsewhere
    }
    double value = maybe ? maybe->value_or_zero(region) : 0.0;
    (value > 0.0 ? positive : cold).push_back(region);
  }
  std::stable_sort(positive.begin(), positive.end(),
                   [&](RegionId lhs, RegionId rhs) {
                     double al = maybe->value_or_zero(lhs);
                     double ar = maybe->value_or_zero(rhs);
                     if (al != ar) return al > ar;
                     return lhs < rhs;
                   });
  auto load_of = [&](RegionId r) {
    auto it = region_loads.find(r);
    return it == region_loads.end() ? 0.0 : it->second;
  };
  std::stable_sort(cold.begin(), cold.end(), [&](RegionId lhs, RegionId rhs) {
    double ll = load_of(lhs);
    double lr = load_of(rhs);
    if (ll != lr) return ll < lr;
    return lhs < rhs;
  });
  positive.insert(positive.end(), cold.begin(), cold.end());
  return positive;
}

RegionId CellAgent::primary_among(const std::vector<RegionId>& current,
                                  const RegionDirectory& directory) const {
  if (current.empty()) {
    throw SimError(ErrorCode::UnassignedCell,
                   "cell " + std::to_string(cell_) + " has no member regions");
  }
  auto maybe = attraction(directory);
  if (!maybe) return current.front();  // sorted ascending: lowest id
  RegionId best = current.front();
  double best_value = maybe->value_or_zero(best);
  for (RegionId r : current) {
    double v = maybe->value_or_zero(r);
    if (v > best_value) {
      best = r;
      best_value = v;
    }
  }
  return best;
}

MmeAgent::MmeAgent(RegionId region, double capacity, double delta)
    : region_(region), capacity_(capacity), delta_(delta) {
  if (capacity <= 0.0) {
    throw SimError(ErrorCode::ConfigError, "capacity must be positive");
  }
  if (delta < 0.0) {
    throw SimError(ErrorCode::ConfigError, "delta must be non-negative");
  }
}

AssignmentDecision MmeAgent::handle_assignment_request(CellId cell,
                                                       double cell_load,
                                                       double a_n) {
  assert(assigned_.count(cell) == 0);
  if (load_ + cell_load < capacity_) {
    assigned_[cell] = cell_load;
    attraction_of_[cell] = a_n;
    load_ += cell_load;
    return {AssignmentDecision::Kind::Accept, kNoCell};
  }
  if (assigned_.empty()) {
    throw SimError(ErrorCode::EmptyRegionOverflow,
                   "region " + std::to_string(region_) +
                       " cannot fit a single cell of load " +
                       std::to_string(cell_load));
  }
  auto min_it = attraction_of_.begin();
  for (auto it = attraction_of_.begin(); it != attraction_of_.end(); ++it) {
    if (it->second < min_it->second) min_it = it;  // ties keep lowest cell id
  }
  if (a_n > min_it->second + delta_) {
    CellId evicted = min_it->first;
    load_ -= assigned_.at(evicted);
    assigned_.erase(evicted);
    attraction_of_.erase(evicted);
    assigned_[cell] = cell_load;
    attraction_of_[cell] = a_n;
    load_ += cell_load;
    return {AssignmentDecision::Kind::AcceptWithEviction, evicted};
  }
  return {AssignmentDecision::Kind::Reject, kNoCell};
}

void MmeAgent::refresh_attraction(CellId cell, double a_n) {
  if (assigned_.count(cell) == 0) {
    throw SimError(ErrorCode::NotAssigned,
                   "cell " + std::to_string(cell) + " not assigned to region " +
                       std::to_string(region_));
  }
  attraction_of_[cell] = a_n;
}

void MmeAgent::update_cell_load(CellId cell, double new_load) {
  auto it = assigned_.find(cell);
  if (it == assigned_.end()) {
    throw SimError(ErrorCode::NotAssigned,
                   "cell " + std::to_string(cell) + " not assigned to region " +
                       std::to_string(region_));
  }
  load_ += new_load - it->second;
  it->second = new_load;
}

void MmeAgent::force_assign(CellId cell, double cell_load, double a_n) {
  assert(assigned_.count(cell) == 0);
  assigned_[cell] = cell_load;
  attraction_of_[cell] = a_n;
  load_ += cell_load;
}

void MmeAgent::remove(CellId cell) {
  auto it = assigned_.find(cell);
  if (it == assigned_.end()) {
    throw SimError(ErrorCode::NotAssigned,
                   "cell " + std::to_string(cell) + " not assigned to region " +
                       std::to_string(region_));
  }
  load_ -= it->second;
  assigned_.erase(it);
  attraction_of_.erase(cell);
}

}  // namespace regionsim
