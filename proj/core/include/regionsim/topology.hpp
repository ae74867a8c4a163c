#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "regionsim/rng.hpp"
#include "regionsim/types.hpp"

namespace regionsim {

struct Coord {
  double x = 0.0;
  double y = 0.0;
};

struct ExplicitEdge {
  CellId a = 0;
  CellId b = 0;
  /// Set when the edge's direct-link status is pinned (e.g. loaded from a
  /// topology file); unset edges get a Bernoulli(p_x2) draw at build time.
  std::optional<bool> direct;
};

/// Declarative description of a cell graph. Three families:
///   grid(w, h)                      4-neighbour lattice
///   community(n, per, inter_edges)  rings with chords at distance 1 and 2,
///                                   consecutive communities bridged
///   explicit(n_cells, edges)        arbitrary edge list
struct TopologySpec {
  enum class Kind { Grid, Community, Explicit };

  Kind kind = Kind::Grid;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t n_communities = 0;
  std::uint32_t cells_per_community = 0;
  std::uint32_t inter_edges = 0;
  std::uint32_t n_cells = 0;
  std::vector<ExplicitEdge> edges;
  /// Fraction of adjacency pairs that carry a direct (X2/Xn) interface.
  double p_x2 = 1.0;

  static TopologySpec grid(std::uint32_t w, std::uint32_t h, double p_x2 = 1.0);
  static TopologySpec community(std::uint32_t n_communities,
                                std::uint32_t cells_per_community,
                                std::uint32_t inter_edges, double p_x2 = 1.0);
  static TopologySpec explicit_graph(std::uint32_t n_cells,
                                     std::vector<ExplicitEdge> edges,
                                     double p_x2 = 1.0);
};

/// Immutable, validated cell graph: symmetric irreflexive adjacency, a
/// direct-link subset, optional 2-D coordinates and community labels.
/// Safe to share read-only across any number of runs.
class Topology {
 public:
  std::uint32_t cell_count() const { return n_cells_; }
  std::size_t edge_count() const { return edge_list_.size(); }
  std::size_t direct_link_count() const;

  /// Adjacency partners of `cell` in ascending id order.
  const std::vector<CellId>& neighbors(CellId cell) const;

  bool adjacent(CellId a, CellId b) const;
  bool has_direct_link(CellId a, CellId b) const;

  /// Undirected edge list, each pair with a < b, sorted.
  const std::vector<std::pair<CellId, CellId>>& edges() const {
    return edge_list_;
  }

  bool has_coordinates() const { return !coords_.empty(); }
  Coord coordinate(CellId cell) const;

  /// Community label from a community spec, -1 otherwise.
  int community_of(CellId cell) const;
  std::uint32_t community_count() const { return n_communities_; }

  friend Topology build_topology(const TopologySpec& spec, Rng& rng);

 private:
  void check_cell(CellId cell) const;

  std::uint32_t n_cells_ = 0;
  std::uint32_t n_communities_ = 0;
  std::vector<std::vector<CellId>> adjacency_;
  std::vector<std::pair<CellId, CellId>> edge_list_;
  std::vector<std::pair<CellId, CellId>> direct_links_;  // sorted, a < b
  std::vector<Coord> coords_;
  std::vector<int> community_;
};

/// Validates and materializes a spec. Throws MalformedSpec for self-loops,
/// duplicate edges or out-of-range ids, DisconnectedGraph when the adjacency
/// graph is not connected.
Topology build_topology(const TopologySpec& spec, Rng& rng);

/// Reads an explicit topology file: header line "cells N", then one edge per
/// line "a b [direct|s1only]". '#' starts a comment. Throws MalformedSpec
/// with the offending line number.
TopologySpec load_topology_spec(const std::string& path);

}  // namespace regionsim
