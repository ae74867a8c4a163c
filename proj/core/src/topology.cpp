#include "regionsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>
#include <map>

namespace regionsim {

namespace {

std::pair<CellId, CellId> ordered(CellId a, CellId b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

std::uint32_t parse_u32(const std::string& tok, std::size_t line_no) {
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(tok, &pos);
  } catch (const std::exception&) {
    throw SimError(ErrorCode::MalformedSpec,
                   "topology file line " + std::to_string(line_no) +
                       ": expected integer, got '" + tok + "'");
  }
  if (pos != tok.size() || v > 0xffffffffUL) {
    throw SimError(ErrorCode::MalformedSpec,
                   "topology file line " + std::to_string(line_no) +
                       ": bad integer '" + tok + "'");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

TopologySpec TopologySpec::grid(std::uint32_t w, std::uint32_t h, double p_x2) {
  TopologySpec s;
  s.kind = Kind::Grid;
  s.width = w;
  s.height = h;
  s.p_x2 = p_x2;
  return s;
}

TopologySpec TopologySpec::community(std::uint32_t n_communities,
                                     std::uint32_t cells_per_community,
                                     std::uint32_t inter_edges, double p_x2) {
  TopologySpec s;
  s.kind = Kind::Community;
  s.n_communities = n_communities;
  s.cells_per_community = cells_per_community;
  s.inter_edges = inter_edges;
  s.p_x2 = p_x2;
  return s;
}

TopologySpec TopologySpec::explicit_graph(std::uint32_t n_cells,
                                          std::vector<ExplicitEdge> edges,
                                          double p_x2) {
  TopologySpec s;
  s.kind = Kind::Explicit;
  s.n_cells = n_cells;
  s.edges = std::move(edges);
  s.p_x2 = p_x2;
  return s;
}

void Topology::check_cell(CellId cell) const {
  if (cell >= n_cells_) {
    throw SimError(ErrorCode::UnknownCell,
                   "cell " + std::to_string(cell) + " out of range (have " +
                       std::to_string(n_cells_) + ")");
  }
}

const std::vector<CellId>& Topology::neighbors(CellId cell) const {
  check_cell(cell);
  return adjacency_[cell];
}

bool Topology::adjacent(CellId a, CellId b) const {
  check_cell(a);
  check_cell(b);
  if (a == b) return false;
  const auto& nb = adjacency_[a];
  return std::binary_search(nb.begin(), nb.end(), b);
}

bool Topology::has_direct_link(CellId a, CellId b) const {
  check_cell(a);
  check_cell(b);
  if (a == b) return false;
  return std::binary_search(direct_links_.begin(), direct_links_.end(),
                            ordered(a, b));
}

std::size_t Topology::direct_link_count() const { return direct_links_.size(); }

Coord Topology::coordinate(CellId cell) const {
  check_cell(cell);
  if (coords_.empty()) {
    throw SimError(ErrorCode::MalformedSpec, "topology has no coordinates");
  }
  return coords_[cell];
}

int Topology::community_of(CellId cell) const {
  check_cell(cell);
  if (community_.empty()) return -1;
  return community_[cell];
}

Topology build_topology(const TopologySpec& spec, Rng& rng) {
  if (spec.p_x2 < 0.0 || spec.p_x2 > 1.0) {
    throw SimError(ErrorCode::MalformedSpec, "p_x2 must lie in [0, 1]");
  }

  Topology topo;
  // Unordered pair -> pinned direct flag (explicit edges only).
  std::map<std::pair<CellId, CellId>, std::optional<bool>> edge_set;

  auto add_edge = [&](CellId a, CellId b, std::optional<bool> direct,
                      bool allow_duplicate) {
    if (a == b) {
      throw SimError(ErrorCode::MalformedSpec,
                     "self-loop on cell " + std::to_string(a));
    }
    if (a >= topo.n_cells_ || b >= topo.n_cells_) {
      throw SimError(ErrorCode::MalformedSpec,
                     "edge (" + std::to_string(a) + ", " + std::to_string(b) +
                         ") references cell outside 0.." +
                         std::to_string(topo.n_cells_ - 1));
    }
    auto key = ordered(a, b);
    auto [it, inserted] = edge_set.emplace(key, direct);
    if (!inserted && !allow_duplicate) {
      throw SimError(ErrorCode::MalformedSpec,
                     "duplicate edge (" + std::to_string(key.first) + ", " +
                         std::to_string(key.second) + ")");
    }
    (void)it;
  };

  switch (spec.kind) {
    case TopologySpec::Kind::Grid: {
      if (spec.width == 0 || spec.height == 0) {
        throw SimError(ErrorCode::MalformedSpec,
                       "grid dimensions must be positive");
      }
      topo.n_cells_ = spec.width * spec.height;
      auto at = [&](std::uint32_t col, std::uint32_t row) {
        return row * spec.width + col;
      };
      for (std::uint32_t row = 0; row < spec.height; ++row) {
        for (std::uint32_t col = 0; col < spec.width; ++col) {
          if (col + 1 < spec.width)
            add_edge(at(col, row), at(col + 1, row), std::nullopt, false);
          if (row + 1 < spec.height)
            add_edge(at(col, row), at(col, row + 1), std::nullopt, false);
        }
      }
      topo.coords_.resize(topo.n_cells_);
      for (std::uint32_t row = 0; row < spec.height; ++row) {
        for (std::uint32_t col = 0; col < spec.width; ++col) {
          topo.coords_[at(col, row)] = {static_cast<double>(col),
                                        static_cast<double>(row)};
        }
      }
      break;
    }
    case TopologySpec::Kind::Community: {
      const std::uint32_t nc = spec.n_communities;
      const std::uint32_t cp = spec.cells_per_community;
      if (nc == 0 || cp < 3) {
        throw SimError(ErrorCode::MalformedSpec,
                       "community topology needs >= 1 community of >= 3 cells");
      }
      if (spec.inter_edges > cp) {
        throw SimError(ErrorCode::MalformedSpec,
                       "inter_edges exceeds cells_per_community");
      }
      if (nc == 1 && spec.inter_edges > 0) {
        throw SimError(ErrorCode::MalformedSpec,
                       "single community cannot have inter edges");
      }
      topo.n_cells_ = nc * cp;
      topo.n_communities_ = nc;
      auto at = [&](std::uint32_t comm, std::uint32_t k) {
        return comm * cp + (k % cp);
      };
      // Ring plus chords at distance 2; duplicates collapse for tiny rings.
      for (std::uint32_t c = 0; c < nc; ++c) {
        for (std::uint32_t k = 0; k < cp; ++k) {
          add_edge(at(c, k), at(c, k + 1), std::nullopt, true);
          add_edge(at(c, k), at(c, k + 2), std::nullopt, true);
        }
      }
      // Bridges between cyclically consecutive communities; the wrap pair
      // only exists once nc >= 3 (nc == 2 would double it).
      const std::uint32_t pairs = (nc >= 3) ? nc : (nc == 2 ? 1u : 0u);
      for (std::uint32_t c = 0; c < pairs; ++c) {
        for (std::uint32_t j = 0; j < spec.inter_edges; ++j) {
          const std::uint32_t offset = j * cp / spec.inter_edges;
          add_edge(at(c, offset), at((c + 1) % nc, offset), std::nullopt,
                   false);
        }
      }
      topo.community_.resize(topo.n_cells_);
      topo.coords_.resize(topo.n_cells_);
      // All cells sit on one shared circle at unit spacing, communities as
      // contiguous arcs. Geography deliberately ignores community borders.
      const double radius =
          (topo.n_cells_ >= 2)
              ? 0.5 / std::sin(std::numbers::pi / topo.n_cells_)
              : 0.0;
      for (std::uint32_t c = 0; c < nc; ++c) {
        for (std::uint32_t k = 0; k < cp; ++k) {
          const std::uint32_t id = at(c, k);
          const double phi = 2.0 * std::numbers::pi * id / topo.n_cells_;
          topo.community_[id] = static_cast<int>(c);
          topo.coords_[id] = {radius * std::cos(phi), radius * std::sin(phi)};
        }
      }
      break;
    }
    case TopologySpec::Kind::Explicit: {
      if (spec.n_cells == 0) {
        throw SimError(ErrorCode::MalformedSpec,
                       "explicit topology needs at least one cell");
      }
      topo.n_cells_ = spec.n_cells;
      for (const auto& e : spec.edges) {
        add_edge(e.a, e.b, e.direct, false);
      }
      break;
    }
  }

  topo.adjacency_.assign(topo.n_cells_, {});
  topo.edge_list_.reserve(edge_set.size());
  for (const auto& [pair, direct] : edge_set) {
    (void)direct;
    topo.edge_list_.push_back(pair);
    topo.adjacency_[pair.first].push_back(pair.second);
    topo.adjacency_[pair.second].push_back(pair.first);
  }
  for (auto& nb : topo.adjacency_) std::sort(nb.begin(), nb.end());

  // Connectivity check before any RNG draw so malformed graphs never
  // perturb the direct-link stream of a later valid build.
  if (topo.n_cells_ > 0) {
    std::vector<char> seen(topo.n_cells_, 0);
    std::queue<CellId> frontier;
    frontier.push(0);
    seen[0] = 1;
    std::uint32_t reached = 1;
    while (!frontier.empty()) {
      CellId cur = frontier.front();
      frontier.pop();
      for (CellId nb : topo.adjacency_[cur]) {
        if (!seen[nb]) {
          seen[nb] = 1;
          ++reached;
          frontier.push(nb);
        }
      }
    }
    if (reached != topo.n_cells_) {
      throw SimError(ErrorCode::DisconnectedGraph,
                     "topology is disconnected: reached " +
                         std::to_string(reached) + " of " +
                         std::to_string(topo.n_cells_) + " cells");
    }
  }

  // Direct-link draws happen in canonical edge order for reproducibility.
  for (const auto& pair : topo.edge_list_) {
    const auto& pinned = edge_set[pair];
    bool direct = pinned.has_value() ? *pinned : rng.bernoulli(spec.p_x2);
    if (direct) topo.direct_links_.push_back(pair);
  }
  return topo;
}

TopologySpec load_topology_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw SimError(ErrorCode::IoError, "cannot open topology file: " + path);
  }
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::uint32_t n_cells = 0;
  std::vector<ExplicitEdge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream ss(line);
    std::vector<std::string> toks;
    for (std::string t; ss >> t;) toks.push_back(t);
    if (toks.empty()) continue;
    if (!have_header) {
      if (toks.size() != 2 || toks[0] != "cells") {
        throw SimError(ErrorCode::MalformedSpec,
                       "topology file line " + std::to_string(line_no) +
                           ": expected 'cells N' header");
      }
      n_cells = parse_u32(toks[1], line_no);
      have_header = true;
      continue;
    }
    if (toks.size() < 2 || toks.size() > 3) {
      throw SimError(ErrorCode::MalformedSpec,
                     "topology file line " + std::to_string(line_no) +
                         ": expected 'a b [direct|s1only]'");
    }
    ExplicitEdge e;
    e.a = parse_u32(toks[0], line_no);
    e.b = parse_u32(toks[1], line_no);
    if (toks.size() == 3) {
      if (toks[2] == "direct") {
        e.direct = true;
      } else if (toks[2] == "s1only") {
        e.direct = false;
      } else {
        throw SimError(ErrorCode::MalformedSpec,
                       "topology file line " + std::to_string(line_no) +
                           ": unknown link tag '" + toks[2] + "'");
      }
    }
    edges.push_back(e);
  }
  if (!have_header) {
    throw SimError(ErrorCode::MalformedSpec,
                   "topology file has no 'cells N' header");
  }
  return TopologySpec::explicit_graph(n_cells, std::move(edges));
}

}  // namespace regionsim
