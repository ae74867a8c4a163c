#include "regionsim/mobility.hpp"

#include <fstream>
#include <sstream>

namespace regionsim {

namespace {

std::uint64_t parse_field_u64(const std::string& tok, std::size_t line_no,
                              const char* what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(tok, &pos);
  } catch (const std::exception&) {
    throw SimError(ErrorCode::ParseError,
                   "trace line " + std::to_string(line_no) + ": bad " + what +
                       " '" + tok + "'");
  }
  if (pos != tok.size()) {
    throw SimError(ErrorCode::ParseError,
                   "trace line " + std::to_string(line_no) + ": bad " + what +
                       " '" + tok + "'");
  }
  return v;
}

}  // namespace

MobilityModel MobilityModel::random_walk(double p_move) {
  MobilityModel m;
  m.kind = Kind::RandomWalk;
  m.p_move = p_move;
  return m;
}

MobilityModel MobilityModel::community_flow(double q, double p_move) {
  MobilityModel m;
  m.kind = Kind::CommunityFlow;
  m.q = q;
  m.p_move = p_move;
  return m;
}

MobilityModel MobilityModel::trace(std::string path) {
  MobilityModel m;
  m.kind = Kind::Trace;
  m.trace_path = std::move(path);
  return m;
}

double FlowMatrix::total() const {
  double sum = 0.0;
  for (double c : counts_) sum += c;
  return sum;
}

void FlowMatrix::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw SimError(ErrorCode::IoError, "cannot write flow csv: " + path);
  }
  out << "source,target,count\n";
  for (CellId i = 0; i < n_; ++i) {
    for (CellId j = 0; j < n_; ++j) {
      double c = counts_[static_cast<std::size_t>(i) * n_ + j];
      if (c != 0.0) {
        out << i << ',' << j << ',';
        if (c == static_cast<double>(static_cast<std::uint64_t>(c))) {
          out << static_cast<std::uint64_t>(c);
        } else {
          out << c;
        }
        out << '\n';
      }
    }
  }
}

FlowMatrix FlowMatrix::load_csv(const std::string& path,
                                std::uint32_t n_hint) {
  std::ifstream in(path);
  if (!in) {
    throw SimError(ErrorCode::IoError, "cannot open flow csv: " + path);
  }
  struct Entry {
    CellId i;
    CellId j;
    double c;
  };
  std::vector<Entry> entries;
  std::uint32_t max_id = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "source,target,count") continue;
    std::istringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') ||
        !std::getline(ss, c)) {
      throw SimError(ErrorCode::ParseError,
                     "flow csv line " + std::to_string(line_no) +
                         ": expected 'source,target,count'");
    }
    Entry e;
    e.i = static_cast<CellId>(parse_field_u64(a, line_no, "source"));
    e.j = static_cast<CellId>(parse_field_u64(b, line_no, "target"));
    try {
      std::size_t pos = 0;
      e.c = std::stod(c, &pos);
      if (pos != c.size()) throw std::invalid_argument(c);
    } catch (const std::exception&) {
      throw SimError(ErrorCode::ParseError,
                     "flow csv line " + std::to_string(line_no) +
                         ": bad count '" + c + "'");
    }
    max_id = std::max({max_id, e.i, e.j});
    entries.push_back(e);
  }
  std::uint32_t n = std::max(n_hint, entries.empty() ? n_hint : max_id + 1);
  FlowMatrix flow(n);
  for (const auto& e : entries) flow.add(e.i, e.j, e.c);
  return flow;
}

std::optional<CellId> step_ue(const MobilityModel& model, const Topology& topo,
                              CellId current, Rng& rng) {
  const auto& nb = topo.neighbors(current);
  switch (model.kind) {
    case MobilityModel::Kind::RandomWalk: {
      if (!rng.bernoulli(model.p_move)) return std::nullopt;
      return nb[rng.uniform_index(nb.size())];
    }
    case MobilityModel::Kind::CommunityFlow: {
      if (topo.community_count() == 0) {
        throw SimError(ErrorCode::ConfigError,
                       "community_flow mobility requires a community topology");
      }
      if (!rng.bernoulli(model.p_move)) return std::nullopt;
      std::vector<CellId> same;
      std::vector<CellId> cross;
      const int home = topo.community_of(current);
      for (CellId n : nb) {
        (topo.community_of(n) == home ? same : cross).push_back(n);
      }
      // An empty side forces the other without consuming a draw.
      const std::vector<CellId>* pick = &same;
      if (same.empty()) {
        pick = &cross;
      } else if (!cross.empty() && !rng.bernoulli(model.q)) {
        pick = &cross;
      }
      return (*pick)[rng.uniform_index(pick->size())];
    }
    case MobilityModel::Kind::Trace:
      throw SimError(ErrorCode::ConfigError,
                     "trace mobility cannot be stepped synthetically");
  }
  return std::nullopt;
}

std::vector<HandoverEvent> generate_handovers(const MobilityModel& model,
                                              const Topology& topo,
                                              std::uint32_t n_ues,
                                              std::uint64_t n_events,
                                              Rng& rng) {
  if (n_ues == 0) {
    throw SimError(ErrorCode::ConfigError, "need at least one UE");
  }
  std::vector<CellId> at(n_ues);
  for (auto& cell : at) {
    cell = static_cast<CellId>(rng.uniform_index(topo.cell_count()));
  }
  std::vector<HandoverEvent> events;
  events.reserve(n_events);
  while (events.size() < n_events) {
    UeId ue = static_cast<UeId>(rng.uniform_index(n_ues));
    auto next = step_ue(model, topo, at[ue], rng);
    if (!next) continue;  // Stay consumes no event index
    events.push_back({events.size(), ue, at[ue], *next});
    at[ue] = *next;
  }
  return events;
}

std::vector<HandoverEvent> load_trace(const std::string& path,
                                      const Topology& topo) {
  std::ifstream in(path);
  if (!in) {
    throw SimError(ErrorCode::IoError, "cannot open trace: " + path);
  }
  std::vector<HandoverEvent> events;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != "time,ue,source,target") {
        throw SimError(ErrorCode::ParseError,
                       "trace line " + std::to_string(line_no) +
                           ": expected header 'time,ue,source,target'");
      }
      seen_header = true;
      continue;
    }
    std::istringstream ss(line);
    std::string f[4];
    if (!std::getline(ss, f[0], ',') || !std::getline(ss, f[1], ',') ||
        !std::getline(ss, f[2], ',') || !std::getline(ss, f[3])) {
      throw SimError(ErrorCode::ParseError,
                     "trace line " + std::to_string(line_no) +
                         ": expected 4 fields");
    }
    HandoverEvent e;
    e.time = parse_field_u64(f[0], line_no, "time");
    e.ue = static_cast<UeId>(parse_field_u64(f[1], line_no, "ue"));
    e.source = static_cast<CellId>(parse_field_u64(f[2], line_no, "source"));
    e.target = static_cast<CellId>(parse_field_u64(f[3], line_no, "target"));
    if (e.source == e.target) {
      throw SimError(ErrorCode::ParseError,
                     "trace line " + std::to_string(line_no) +
                         ": source equals target");
    }
    if (!events.empty() && e.time <= events.back().time) {
      throw SimError(ErrorCode::ParseError,
                     "trace line " + std::to_string(line_no) +
                         ": time not strictly ascending");
    }
    if (e.source >= topo.cell_count() || e.target >= topo.cell_count() ||
        !topo.adjacent(e.source, e.target)) {
      throw SimError(ErrorCode::NonAdjacentHandover,
                     "trace line " + std::to_string(line_no) + ": cells " +
                         f[2] + " and " + f[3] + " are not adjacent");
    }
    events.push_back(e);
  }
  if (!seen_header) {
    throw SimError(ErrorCode::ParseError, "trace has no header row");
  }
  return events;
}

FlowMatrix flow_matrix(const std::vector<HandoverEvent>& events,
                       std::uint32_t n_cells) {
  FlowMatrix flow(n_cells);
  for (const auto& e : events) flow.add(e.source, e.target);
  return flow;
}

}  // namespace regionsim
