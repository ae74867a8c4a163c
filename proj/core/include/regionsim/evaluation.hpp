#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regionsim/mobility.hpp"
#include "regionsim/protocol.hpp"
#include "regionsim/rng.hpp"
#include "regionsim/topology.hpp"

namespace regionsim {

struct Partition {
  std::vector<RegionId> region_of;  // indexed by cell id
  bool capacities_respected = false;
};

/// Geographic baseline: n_regions seeds spread by greedy farthest-point
/// (first seed = cell 0), then cells join the nearest non-full seed in
/// (distance, cell id) order, ties between seeds by ascending seed index.
/// Distance is Euclidean when the topology has coordinates, hop count
/// otherwise.
Partition static_partition(const Topology& topo, std::uint32_t n_regions,
                           double capacity);
Partition static_partition_caps(const Topology& topo,
                                const std::vector<double>& capacities);

/// Control baseline: shuffled round-robin deal respecting capacity.
Partition random_partition(const Topology& topo, std::uint32_t n_regions,
                           double capacity, Rng& rng);

/// Directed flow crossing the partition: sum of flow[i][j] over ordered
/// pairs with differing regions.
double cut_value(const FlowMatrix& flow, const Partition& partition);

enum class OracleMode { Exhaustive, BranchAndBound };

struct OracleResult {
  Partition partition;
  double cut = 0.0;
};

/// Exact minimum-cut partition into at most n_regions blocks of at most
/// `capacity` cells each; ties resolved toward the lexicographically
/// smallest region_of vector. Exhaustive mode enumerates set partitions
/// (n <= 16); branch-and-bound admits up to 40 cells using the
/// cut-so-far lower bound. Throws TooLarge / Infeasible.
OracleResult oracle_partition(const FlowMatrix& flow, std::uint32_t n_regions,
                              double capacity,
                              OracleMode mode = OracleMode::Exhaustive);

/// Per-event data the window metrics fold over.
struct EventRecord {
  HandoverClass cls = HandoverClass::X2;
  std::uint32_t assignment_msgs = 0;  // assignment-plane messages this event
};

struct WindowMetrics {
  std::uint64_t window = 0;
  std::uint64_t x2 = 0;
  std::uint64_t s1_intra = 0;
  std::uint64_t s1_inter = 0;
  double ratio = 0.0;  // inter / window event count
  double signaling = 0.0;
  std::uint64_t assignment_changes = 0;  // assignment-plane message count
  double jain = 1.0;
  double max_load = 0.0;
  std::map<RegionId, double> loads;  // live regions at window end
};

WindowMetrics compute_window(std::uint64_t index,
                             const std::vector<EventRecord>& events,
                             const std::map<RegionId, double>& loads_at_end,
                             const SignalingCostModel& cost);

std::vector<WindowMetrics> compute_window_metrics(
    const std::vector<EventRecord>& events,
    const std::vector<std::map<RegionId, double>>& loads_at_window_end,
    std::uint32_t window_size, const SignalingCostModel& cost);

/// (Sum x)^2 / (n * Sum x^2); all-zero or empty loads count as perfectly
/// fair (1.0).
double jain_index(const std::vector<double>& loads);

/// Smallest window w such that every ratio from w on stays within tol of
/// the mean over the final tenth (at least one window) of the series.
/// nullopt = never settles.
std::optional<std::uint64_t> convergence_time(
    const std::vector<double>& ratio_series, double tol);

inline constexpr const char* kMetricsCsvHeader =
    "window,x2,s1_intra,s1_inter,ratio,signaling,assignment_changes,jain,max_load";

/// Whole numbers print without a decimal point; everything else as fixed
/// six-digit precision with trailing zeros trimmed.
std::string format_number(double value);

std::string window_csv_row(const WindowMetrics& w);
void write_metrics_csv(const std::string& path,
                       const std::vector<WindowMetrics>& windows);

}  // namespace regionsim
