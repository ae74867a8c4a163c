#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "regionsim/directory.hpp"
#include "regionsim/types.hpp"

namespace regionsim {

/// Per-cell decayed handover-arrival counters keyed by source region.
/// total always equals the exact sum of the counters; entries decayed
/// below 1e-12 are pruned.
class AttractionTable {
 public:
  explicit AttractionTable(double decay = 1.0);
  AttractionTable(double decay, std::map<RegionId, double> counters);

  double decay() const { return decay_; }
  double total() const { return total_; }
  double counter(RegionId region) const;
  const std::map<RegionId, double>& counters() const { return counters_; }

  /// Multiplies every counter by the decay factor, then adds 1 to the
  /// source region's counter. Retired (tombstoned) regions keep decaying.
  void record(RegionId source_region);

 private:
  void recompute_total();

  double decay_ = 1.0;
  std::map<RegionId, double> counters_;
  double total_ = 0.0;
};

/// Normalized attraction per live region; values sum to 1.
struct AttractionVector {
  std::map<RegionId, double> values;

  double value_or_zero(RegionId region) const {
    auto it = values.find(region);
    return it == values.end() ? 0.0 : it->second;
  }
};

struct CellAgentParams {
  std::uint32_t k = 1;            // regions managing the cell
  double gamma = 0.995;           // counter decay per recorded handover
  double epsilon = 0.05;          // switch hysteresis
  std::uint32_t refresh_interval = 100;  // handovers between attraction reports
};

/// A request the cell sends toward a better-attracting region. displaces
/// names the current member the cell would leave on acceptance (kNoRegion
/// when the request fills a vacancy).
struct AssignmentRequest {
  RegionId target = kNoRegion;
  double attraction = 0.0;  // A(n) toward target, piggybacked to the MME
  RegionId displaces = kNoRegion;
};

/// Cell-side half of the algorithm: counter maintenance, the attraction
/// metric, and the (re)assignment decision rules. Membership itself lives
/// in AssignmentState; decision functions take the current set explicitly.
class CellAgent {
 public:
  CellAgent(CellId cell, CellAgentParams params);

  CellId cell() const { return cell_; }
  const CellAgentParams& params() const { return params_; }
  const AttractionTable& table() const { return table_; }
  std::uint64_t recorded() const { return recorded_; }

  void record_handover(RegionId source_region);

  /// Counters normalized over the live regions; nullopt when the live sum
  /// is zero (no usable data). Every live region gets a value, zeros
  /// included.
  std::optional<AttractionVector> attraction(
      const RegionDirectory& directory) const;

  /// Ranks live regions by attraction (descending, ties by ascending id),
  /// takes the top k, and emits one request per top region not already a
  /// member. The strongest newcomer is paired against the weakest current
  /// member; a request is emitted only when the newcomer leads its
  /// displaced member by at least epsilon. Vacancy-filling requests (fewer
  /// current members than k) are always emitted.
  std::vector<AssignmentRequest> make_assignment_decision(
      const std::vector<RegionId>& current,
      const RegionDirectory& directory) const;

  /// Candidate regions to try after exclusion (eviction or scale-down):
  /// positive-attraction regions by attraction descending (ties by
  /// ascending id), then no-data/zero regions by ascending load then id.
  /// Other current members are filtered out. Throws NoCandidate when the
  /// excluded region is the only live one.
  std::vector<RegionId> make_reassignment(
      RegionId excluded, const std::vector<RegionId>& current,
      const RegionDirectory& directory,
      const std::map<RegionId, double>& region_loads) const;

  /// Member with the highest attraction, ties by ascending id; with no
  /// usable data, the lowest-id member.
  RegionId primary_among(const std::vector<RegionId>& current,
                         const RegionDirectory& directory) const;

 private:
  CellId cell_;
  CellAgentParams params_;
  AttractionTable table_;
  std::uint64_t recorded_ = 0;
};

struct AssignmentDecision {
  enum class Kind { Accept, AcceptWithEviction, Reject };
  Kind kind = Kind::Reject;
  CellId evicted = kNoCell;
};

/// Region-side half: capacity-constrained admission with hysteresis-based
/// eviction. Tracks per-cell stored load and last-reported attraction.
class MmeAgent {
 public:
  MmeAgent(RegionId region, double capacity, double delta);

  RegionId region() const { return region_; }
  double capacity() const { return capacity_; }
  double delta() const { return delta_; }
  double load() const { return load_; }

  /// Cell -> stored load, ascending cell id.
  const std::map<CellId, double>& assigned() const { return assigned_; }
  const std::map<CellId, double>& attraction_of() const {
    return attraction_of_;
  }

  /// Admission rule: plain accept while load + cell_load < capacity;
  /// otherwise accept-with-eviction of the minimum-attraction cell when
  /// a_n > min(A) + delta (strictly); otherwise reject. Accepting updates
  /// the region state; the evicted cell is already removed on return.
  /// Throws EmptyRegionOverflow when the region is empty yet cannot fit
  /// the cell (capacity below a single cell's load).
  AssignmentDecision handle_assignment_request(CellId cell, double cell_load,
                                               double a_n);

  /// Updates the stored attraction for an assigned cell; NotAssigned
  /// otherwise.
  void refresh_attraction(CellId cell, double a_n);

  /// Replaces the stored load of an assigned cell, keeping the load sum
  /// exact.
  void update_cell_load(CellId cell, double new_load);

  /// Capacity-waived admission, used by the engine's reassignment
  /// fallback.
  void force_assign(CellId cell, double cell_load, double a_n);

  void remove(CellId cell);

 private:
  RegionId region_;
  double capacity_;
  double delta_;
  double load_ = 0.0;
  std::map<CellId, double> assigned_;
  std::map<CellId, double> attraction_of_;
};

}  // namespace regionsim
