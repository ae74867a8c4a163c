#include "regionsim/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <queue>

namespace regionsim {

namespace {

// Hop distances from one source; used when a topology has no coordinates
// and for farthest-point seed spreading on hop metrics.
std::vector<double> hop_distances(const Topology& topo, CellId source) {
  std::vector<double> dist(topo.cell_count(),
                           std::numeric_limits<double>::infinity());
  std::queue<CellId> frontier;
  dist[source] = 0.0;
  frontier.push(source);
  while (!frontier.empty()) {
    CellId cur = frontier.front();
    frontier.pop();
    for (CellId nb : topo.neighbors(cur)) {
      if (std::isinf(dist[nb])) {
        dist[nb] = dist[cur] + 1.0;
        frontier.push(nb);
      }
    }
  }
  return dist;
}

std::vector<double> seed_distances(const Topology& topo, CellId seed) {
  if (!topo.has_coordinates()) return hop_distances(topo, seed);
  std::vector<double> dist(topo.cell_count());
  Coord s = topo.coordinate(seed);
  for (CellId c = 0; c < topo.cell_count(); ++c) {
    Coord p = topo.coordinate(c);
    dist[c] = std::hypot(p.x - s.x, p.y - s.y);
  }
  return dist;
}

}  // namespace

Partition static_partition_caps(const Topology& topo,
                                const std::vector<double>& capacities) {
  const std::uint32_t n = topo.cell_count();
  const std::uint32_t n_regions = static_cast<std::uint32_t>(capacities.size());
  if (n_regions == 0) {
    throw SimError(ErrorCode::ConfigError, "need at least one region");
  }
  double cap_sum = 0.0;
  for (double c : capacities) cap_sum += c;
  if (cap_sum < static_cast<double>(n)) {
    throw SimError(ErrorCode::InsufficientCapacity,
                   "capacities sum to " + std::to_string(cap_sum) + " for " +
                       std::to_string(n) + " cells");
  }

  // Greedy farthest-point seeds, first seed pinned to cell 0.
  std::vector<CellId> seeds;
  std::vector<std::vector<double>> dist;  // per seed, per cell
  seeds.push_back(0);
  dist.push_back(seed_distances(topo, 0));
  while (seeds.size() < n_regions) {
    CellId best = kNoCell;
    double best_min = -1.0;
    for (CellId c = 0; c < n; ++c) {
      if (std::find(seeds.begin(), seeds.end(), c) != seeds.end()) continue;
      double d = std::numeric_limits<double>::infinity();
      for (const auto& row : dist) d = std::min(d, row[c]);
      if (d > best_min) {
        best_min = d;
        best = c;
      }
    }
    if (best == kNoCell) best = seeds.back();  // more regions than cells
    seeds.push_back(best);
    dist.push_back(seed_distances(topo, best));
  }

  // Cells claim their nearest seed with room, processed globally in
  // (distance to nearest seed, cell id) order.
  std::vector<CellId> order(n);
  for (CellId c = 0; c < n; ++c) order[c] = c;
  auto nearest = [&](CellId c) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& row : dist) d = std::min(d, row[c]);
    return d;
  };
  std::stable_sort(order.begin(), order.end(), [&](CellId lhs, CellId rhs) {
    double dl = nearest(lhs);
    double dr = nearest(rhs);
    if (dl != dr) return dl < dr;
    return lhs < rhs;
  });

  Partition p;
  p.region_of.assign(n, kNoRegion);
  std::vector<std::uint32_t> count(n_regions, 0);
  for (CellId c : order) {
    std::vector<std::uint32_t> by_seed(n_regions);
    for (std::uint32_t s = 0; s < n_regions; ++s) by_seed[s] = s;
    std::stable_sort(by_seed.begin(), by_seed.end(),
                     [&](std::uint32_t lhs, std::uint32_t rhs) {
                       if (dist[lhs][c] != dist[rhs][c])
                         return dist[lhs][c] < dist[rhs][c];
                       return lhs < rhs;
                     });
    bool placed = false;
    for (std::uint32_t s : by_seed) {
      if (count[s] + 1.0 <= capacities[s]) {
        p.region_of[c] = s;
        ++count[s];
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw SimError(ErrorCode::InsufficientCapacity,
                     "no region has room for cell " + std::to_string(c));
    }
  }
  p.capacities_respected = true;
  return p;
}

Partition static_partition(const Topology& topo, std::uint32_t n_regions,
                           double capacity) {
  return static_partition_caps(topo,
                               std::vector<double>(n_regions, capacity));
}

Partition random_partition(const Topology& topo, std::uint32_t n_regions,
                           double capacity, Rng& rng) {
  const std::uint32_t n = topo.cell_count();
  if (n_regions == 0) {
    throw SimError(ErrorCode::ConfigError, "need at least one region");
  }
  if (static_cast<double>(n_regions) * capacity < static_cast<double>(n)) {
    throw SimError(ErrorCode::InsufficientCapacity,
                   "capacity " + std::to_string(capacity) + " x " +
                       std::to_string(n_regions) + " regions < " +
                       std::to_string(n) + " cells");
  }
  std::vector<CellId> cells(n);
  for (CellId c = 0; c < n; ++c) cells[c] = c;
  rng.shuffle(cells);

  Partition p;
  p.region_of.assign(n, kNoRegion);
  std::vector<std::uint32_t> count(n_regions, 0);
  std::uint32_t next = 0;
  for (CellId c : cells) {
    bool placed = false;
    for (std::uint32_t tries = 0; tries < n_regions; ++tries) {
      std::uint32_t r = (next + tries) % n_regions;
      if (count[r] + 1.0 <= capacity) {
        p.region_of[c] = r;
        ++count[r];
        next = (r + 1) % n_regions;
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw SimError(ErrorCode::InsufficientCapacity,
                     "all regions full before cell " + std::to_string(c));
    }
  }
  p.capacities_respected = true;
  return p;
}

double cut_value(const FlowMatrix& flow, const Partition& partition) {
  const std::uint32_t n = flow.size();
  if (partition.region_of.size() != n) {
    throw SimError(ErrorCode::ConfigError,
                   "partition covers " +
                       std::to_string(partition.region_of.size()) +
                       " cells, flow matrix " + std::to_string(n));
  }
  double cut = 0.0;
  for (CellId i = 0; i < n; ++i) {
    for (CellId j = 0; j < n; ++j) {
      if (partition.region_of[i] != partition.region_of[j]) {
        cut += flow.at(i, j);
      }
    }
  }
  return cut;
}

namespace {

struct BnbContext {
  std::uint32_t n = 0;
  std::uint32_t n_regions = 0;
  std::uint32_t block_cap = 0;
  std::vector<std::vector<double>> w;  // symmetric pair weights
  std::vector<RegionId> label;
  std::vector<std::uint32_t> block_size;
  std::vector<RegionId> best_label;
  double best_cut = 0.0;
  bool have_best = false;
};

void bnb_search(BnbContext& ctx, std::uint32_t cell, std::uint32_t used,
                double cut) {
  if (ctx.have_best && cut >= ctx.best_cut) return;
  if (cell == ctx.n) {
    ctx.best_cut = cut;
    ctx.best_label = ctx.label;
    ctx.have_best = true;
    return;
  }
  std::uint32_t limit = std::min(used + 1, ctx.n_regions);
  for (std::uint32_t b = 0; b < limit; ++b) {
    if (ctx.block_size[b] >= ctx.block_cap) continue;
    double added = 0.0;
    for (std::uint32_t j = 0; j < cell; ++j) {
      if (ctx.label[j] != b) added += ctx.w[cell][j];
    }
    ctx.label[cell] = b;
    ++ctx.block_size[b];
    bnb_search(ctx, cell + 1, std::max(used, b + 1), cut + added);
    --ctx.block_size[b];
  }
  ctx.label[cell] = kNoRegion;
}

}  // namespace

OracleResult oracle_partition(const FlowMatrix& flow, std::uint32_t n_regions,
                              double capacity, OracleMode mode) {
  const std::uint32_t n = flow.size();
  if (n == 0 || n_regions == 0) {
    throw SimError(ErrorCode::ConfigError,
                   "oracle needs at least one cell and one region");
  }
  const std::uint32_t block_cap =
      capacity >= 1.0 ? static_cast<std::uint32_t>(std::floor(capacity)) : 0;
  if (static_cast<std::uint64_t>(block_cap) * n_regions < n) {
    throw SimError(ErrorCode::Infeasible,
                   std::to_string(n_regions) + " regions of capacity " +
                       std::to_string(capacity) + " cannot hold " +
                       std::to_string(n) + " cells");
  }
  const std::uint32_t limit = mode == OracleMode::Exhaustive ? 16 : 40;
  if (n > limit) {
    throw SimError(ErrorCode::TooLarge,
                   std::to_string(n) + " cells exceeds the " +
                       std::to_string(limit) + "-cell limit of this mode");
  }

  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (CellId i = 0; i < n; ++i) {
    for (CellId j = 0; j < n; ++j) {
      if (i != j) w[i][j] = flow.at(i, j) + flow.at(j, i);
    }
  }

  auto cut_for = [&](const std::vector<RegionId>& label) {
    double cut = 0.0;
    for (CellId i = 0; i < n; ++i) {
      for (CellId j = static_cast<CellId>(i + 1); j < n; ++j) {
        if (label[i] != label[j]) cut += w[i][j];
      }
    }
    return cut;
  };

  if (mode == OracleMode::Exhaustive) {
    // Restricted-growth strings enumerate every set partition exactly once
    // in lexicographic order of the label vector, so the first minimum is
    // automatically the lexicographically smallest one.
    std::vector<RegionId> a(n, 0);
    std::vector<RegionId> best;
    double best_cut = 0.0;
    bool have = false;
    while (true) {
      std::vector<std::uint32_t> sizes(n_regions, 0);
      bool feasible = true;
      for (RegionId r : a) {
        if (++sizes[r] > block_cap) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        double cut = cut_for(a);
        if (!have || cut < best_cut) {
          best = a;
          best_cut = cut;
          have = true;
        }
      }
      // Next restricted-growth string with labels below n_regions.
      int i = static_cast<int>(n) - 1;
      for (; i > 0; --i) {
        RegionId prefix_max = 0;
        for (int j = 0; j < i; ++j) prefix_max = std::max(prefix_max, a[j]);
        RegionId cap_label =
            std::min<RegionId>(prefix_max + 1, n_regions - 1);
        if (a[i] < cap_label) break;
      }
      if (i <= 0) break;
      ++a[i];
      for (std::uint32_t j = static_cast<std::uint32_t>(i) + 1; j < n; ++j) {
        a[j] = 0;
      }
    }
    if (!have) {
      throw SimError(ErrorCode::Infeasible, "no feasible partition exists");
    }
    OracleResult result;
    result.partition.region_of = best;
    result.partition.capacities_respected = true;
    result.cut = best_cut;
    return result;
  }

  BnbContext ctx;
  ctx.n = n;
  ctx.n_regions = n_regions;
  ctx.block_cap = block_cap;
  ctx.label.assign(n, kNoRegion);
  ctx.block_size.assign(n_regions, 0);

  // Greedy sequential fill seeds the incumbent; it is also the overall
  // lexicographically smallest feasible labeling.
  std::vector<RegionId> greedy(n);
  for (CellId c = 0; c < n; ++c) greedy[c] = c / block_cap;
  ctx.best_label = greedy;
  ctx.best_cut = cut_for(greedy);
  ctx.have_best = true;
  ctx.w = std::move(w);

  bnb_search(ctx, 0, 0, 0.0);

  OracleResult result;
  result.partition.region_of = ctx.best_label;
  result.partition.capacities_respected = true;
  result.cut = ctx.best_cut;
  return result;
}

double jain_index(const std::vector<double>& loads) {
  if (loads.empty()) return 1.0;
  double sum = 0.0;
  double sq = 0.0;
  for (double x : loads) {
    sum += x;
    sq += x * x;
  }
  if (sq == 0.0) return 1.0;
  return (sum * sum) / (static_cast<double>(loads.size()) * sq);
}

WindowMetrics compute_window(std::uint64_t index,
                             const std::vector<EventRecord>& events,
                             const std::map<RegionId, double>& loads_at_end,
                             const SignalingCostModel& cost) {
  WindowMetrics w;
  w.window = index;
  double signaling = 0.0;
  for (const auto& e : events) {
    switch (e.cls) {
      case HandoverClass::X2: ++w.x2; break;
      case HandoverClass::S1IntraRegion: ++w.s1_intra; break;
      case HandoverClass::S1InterRegion: ++w.s1_inter; break;
    }
    signaling += signaling_cost(e.cls, cost);
    signaling += e.assignment_msgs * (cost.msgs_assignment_change / 2.0);
    w.assignment_changes += e.assignment_msgs;
  }
  const std::uint64_t total = w.x2 + w.s1_intra + w.s1_inter;
  w.ratio = total == 0 ? 0.0 : static_cast<double>(w.s1_inter) / total;
  w.signaling = signaling;
  w.loads = loads_at_end;
  std::vector<double> load_values;
  load_values.reserve(loads_at_end.size());
  for (const auto& [region, load] : loads_at_end) {
    (void)region;
    load_values.push_back(load);
    w.max_load = std::max(w.max_load, load);
  }
  w.jain = jain_index(load_values);
  return w;
}

std::vector<WindowMetrics> compute_window_metrics(
    const std::vector<EventRecord>& events,
    const std::vector<std::map<RegionId, double>>& loads_at_window_end,
    std::uint32_t window_size, const SignalingCostModel& cost) {
  if (window_size == 0) {
    throw SimError(ErrorCode::ConfigError, "window size must be positive");
  }
  std::vector<WindowMetrics> windows;
  std::vector<EventRecord> chunk;
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < events.size(); i += window_size) {
    chunk.assign(events.begin() + i,
                 events.begin() +
                     std::min<std::size_t>(i + window_size, events.size()));
    static const std::map<RegionId, double> empty;
    const auto& loads =
        index < loads_at_window_end.size() ? loads_at_window_end[index] : empty;
    windows.push_back(compute_window(index, chunk, loads, cost));
    ++index;
  }
  return windows;
}

std::optional<std::uint64_t> convergence_time(
    const std::vector<double>& ratio_series, double tol) {
  if (ratio_series.empty()) {
    throw SimError(ErrorCode::ConfigError, "empty ratio series");
  }
  const std::size_t n = ratio_series.size();
  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  double tail_mean = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) tail_mean += ratio_series[i];
  tail_mean /= static_cast<double>(tail);
  const double threshold = tail_mean + tol;

  std::size_t w = n;
  for (std::size_t i = n; i-- > 0;) {
    if (ratio_series[i] > threshold) break;
    w = i;
  }
  if (w == n) return std::nullopt;
  return static_cast<std::uint64_t>(w);
}

std::string format_number(double value) {
  if (std::isfinite(value) && value == std::floor(value) &&
      std::fabs(value) < 9.007199254740992e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld",
                  static_cast<long long>(value));
    return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

std::string window_csv_row(const WindowMetrics& w) {
  std::string row;
  row += std::to_string(w.window);
  row += ',';
  row += std::to_string(w.x2);
  row += ',';
  row += std::to_string(w.s1_intra);
  row += ',';
  row += std::to_string(w.s1_inter);
  row += ',';
  row += format_number(w.ratio);
  row += ',';
  row += format_number(w.signaling);
  row += ',';
  row += std::to_string(w.assignment_changes);
  row += ',';
  row += format_number(w.jain);
  row += ',';
  row += format_number(w.max_load);
  return row;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<WindowMetrics>& windows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw SimError(ErrorCode::IoError, "cannot write metrics csv: " + path);
  }
  out << kMetricsCsvHeader << '\n';
  for (const auto& w : windows) out << window_csv_row(w) << '\n';
}

}  // namespace regionsim
