#include "regionsim/engine.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

namespace regionsim {

AssignmentState init_assignment(InitPolicy policy, const Topology& topo,
                                const RegionDirectory& directory,
                                std::uint32_t k, Rng& rng,
                                const std::vector<RegionId>& pinned) {
  const std::uint32_t n = topo.cell_count();
  const std::vector<RegionId> ids = directory.live_ids();
  if (ids.empty()) {
    throw SimError(ErrorCode::ConfigError, "no live regions to assign to");
  }
  if (k == 0 || k > ids.size()) {
    throw SimError(ErrorCode::ConfigError,
                   "k must lie in [1, live region count]");
  }
  AssignmentState st(n, k);
  std::map<RegionId, double> placed;
  for (RegionId id : ids) placed[id] = 0.0;
  auto has_room = [&](RegionId r) {
    return placed[r] + 1.0 <= directory.capacity_of(r);
  };
  auto place = [&](CellId c, RegionId r) {
    st.join(c, r);
    placed[r] += 1.0;
  };

  switch (policy) {
    case InitPolicy::Random: {
      std::size_t cursor = 0;
      for (std::uint32_t layer = 0; layer < k; ++layer) {
        std::vector<CellId> order(n);
        std::iota(order.begin(), order.end(), 0u);
        rng.shuffle(order);
        for (CellId c : order) {
          bool done = false;
          for (std::size_t step = 0; step < ids.size(); ++step) {
            RegionId r = ids[(cursor + step) % ids.size()];
            if (!st.is_member(c, r) && has_room(r)) {
              place(c, r);
              cursor = (cursor + step + 1) % ids.size();
              done = true;
              break;
            }
          }
          if (!done) {
            throw SimError(ErrorCode::InsufficientCapacity,
                           "random init cannot place cell " +
                               std::to_string(c));
          }
        }
      }
      break;
    }
    case InitPolicy::NeighborMajority: {
      for (std::uint32_t layer = 0; layer < k; ++layer) {
        for (CellId c = 0; c < n; ++c) {
          std::map<RegionId, std::uint32_t> votes;
          for (CellId nb : topo.neighbors(c)) {
            for (RegionId r : st.regions_of(nb)) ++votes[r];
          }
          RegionId pick = kNoRegion;
          std::uint32_t best = 0;
          for (const auto& [r, v] : votes) {
            if (v > best && !st.is_member(c, r) && has_room(r)) {
              pick = r;
              best = v;
            }
          }
          if (pick == kNoRegion) {
            std::vector<RegionId> eligible;
            for (RegionId r : ids) {
              if (!st.is_member(c, r) && has_room(r)) eligible.push_back(r);
            }
            if (eligible.empty()) {
              throw SimError(ErrorCode::InsufficientCapacity,
                             "neighbor-majority init cannot place cell " +
                                 std::to_string(c));
            }
            pick = eligible[rng.uniform_index(eligible.size())];
          }
          place(c, pick);
        }
      }
      break;
    }
    case InitPolicy::Static: {
      if (k != 1) {
        throw SimError(ErrorCode::ConfigError, "static init requires k = 1");
      }
      std::vector<double> caps;
      caps.reserve(ids.size());
      for (RegionId id : ids) caps.push_back(directory.capacity_of(id));
      Partition part = static_partition_caps(topo, caps);
      for (CellId c = 0; c < n; ++c) place(c, ids[part.region_of[c]]);
      break;
    }
    case InitPolicy::Pinned: {
      if (k != 1) {
        throw SimError(ErrorCode::ConfigError, "pinned init requires k = 1");
      }
      if (pinned.size() != n) {
        throw SimError(ErrorCode::ConfigError,
                       "pinned assignment must cover every cell");
      }
      for (CellId c = 0; c < n; ++c) {
        if (!directory.is_live(pinned[c])) {
          throw SimError(ErrorCode::ConfigError,
                         "pinned assignment names non-live region " +
                             std::to_string(pinned[c]));
        }
        if (!has_room(pinned[c])) {
          throw SimError(ErrorCode::InsufficientCapacity,
                         "pinned assignment overfills region " +
                             std::to_string(pinned[c]));
        }
        place(c, pinned[c]);
      }
      break;
    }
  }
  return st;
}

Engine::Engine(Topology topo, const Scenario& scenario)
    : topo_(std::move(topo)), scenario_(scenario) {
  for (double cap : scenario_.initial_capacities) {
    RegionId id = directory_.create_region(cap);
    mmes_.emplace(id, MmeAgent(id, cap, scenario_.delta));
  }
  cells_.reserve(topo_.cell_count());
  for (CellId c = 0; c < topo_.cell_count(); ++c) {
    cells_.emplace_back(c, scenario_.agent);
  }
  Rng init_rng = Rng::substream(scenario_.seed, "init");
  assignment_ =
      init_assignment(scenario_.init_policy, topo_, directory_,
                      scenario_.agent.k, init_rng, scenario_.pinned_assignment);
  for (CellId c = 0; c < topo_.cell_count(); ++c) {
    for (RegionId r : assignment_.regions_of(c)) {
      mmes_.at(r).force_assign(c, cell_load(c), 0.0);
    }
    recompute_primary(c);
  }
  ue_history_.resize(scenario_.n_ues);
  window_events_.reserve(scenario_.window);
  if (scenario_.record.flow) result_.flow.emplace(topo_.cell_count());
}

const CellAgent& Engine::cell_agent(CellId cell) const {
  if (cell >= cells_.size()) {
    throw SimError(ErrorCode::UnknownCell,
                   "cell " + std::to_string(cell) + " out of range");
  }
  return cells_[cell];
}

const MmeAgent& Engine::mme_agent(RegionId region) const {
  auto it = mmes_.find(region);
  if (it == mmes_.end()) {
    throw SimError(ErrorCode::RetiredRegion,
                   "region " + std::to_string(region) + " has no agent");
  }
  return it->second;
}

UeHistory& Engine::ensure_history(UeId ue) {
  if (ue >= ue_history_.size()) ue_history_.resize(ue + 1);
  return ue_history_[ue];
}

RegionId Engine::derive_region_for(const HandoverEvent& event,
                                   HandoverClass cls) {
  UeHistory& hist = ensure_history(event.ue);
  if (hist.visited.empty() || hist.visited.front() != event.source) {
    // First sighting or a trace teleport: the carried history is stale.
    hist.visited.clear();
    hist.push(event.source);
  }
  HandoverRequestMsg ho{event.ue, event.source, event.target, hist};
  log_message({clock_, MessageKind::HoReq, event.ue, event.source, event.target,
               assignment_.primary_of(event.source),
               assignment_.primary_of(event.target), true, cls});
  RegionId source_region;
  if (cls == HandoverClass::S1InterRegion) {
    TauRequestMsg tau{event.ue,
                      encode_guti(assignment_.primary_of(event.source),
                                  event.ue),
                      event.target};
    log_message({clock_, MessageKind::TauReq, event.ue, event.source,
                 event.target, tau.old_guti.gummei,
                 assignment_.primary_of(event.target), true, cls});
    source_region = derive_source_region(tau, directory_);
  } else {
    source_region = derive_source_region(ho, assignment_);
  }
  hist.push(event.target);
  return source_region;
}

void Engine::process_event(const HandoverEvent& event) {
  const HandoverClass cls =
      classify_handover(event.source, event.target, assignment_, topo_);
  const RegionId source_region = derive_region_for(event, cls);

  ++result_.events;
  switch (cls) {
    case HandoverClass::X2: ++result_.x2; break;
    case HandoverClass::S1IntraRegion: ++result_.s1_intra; break;
    case HandoverClass::S1InterRegion: ++result_.s1_inter; break;
  }
  result_.handover_signaling += signaling_cost(cls, scenario_.cost);
  if (result_.flow) result_.flow->add(event.source, event.target);

  cells_[event.target].record_handover(source_region);

  if (scenario_.mode == AlgorithmMode::Active) {
    refresh_if_due(event.target);
    recompute_primary(event.target);
    const auto requests = cells_[event.target].make_assignment_decision(
        assignment_.regions_of(event.target), directory_);
    for (const auto& req : requests) deliver_request(event.target, req);
  }

  window_events_.push_back({cls, cur_assignment_msgs_});
  cur_assignment_msgs_ = 0;
  maybe_flush_window();
  ++clock_;
}

void Engine::deliver_request(CellId cell, const AssignmentRequest& request) {
  // Earlier requests of the same event may have shifted memberships.
  if (!directory_.is_live(request.target) ||
      assignment_.is_member(cell, request.target)) {
    return;
  }
  if (request.displaces != kNoRegion &&
      !assignment_.is_member(cell, request.displaces)) {
    return;
  }
  log_message({clock_, MessageKind::AssignReq, kNoUe, cell, kNoCell, kNoRegion,
               request.target, false, HandoverClass::X2});
  AssignmentDecision decision;
  try {
    decision = mmes_.at(request.target)
                   .handle_assignment_request(cell, cell_load(cell),
                                              request.attraction);
  } catch (const SimError&) {
    ++result_.agent_errors;
    log_message({clock_, MessageKind::AssignRsp, kNoUe, kNoCell, cell,
                 request.target, kNoRegion, false, HandoverClass::X2});
    return;
  }
  log_message({clock_, MessageKind::AssignRsp, kNoUe, kNoCell, cell,
               request.target, kNoRegion, false, HandoverClass::X2});
  if (decision.kind == AssignmentDecision::Kind::Reject) return;

  if (request.displaces != kNoRegion) {
    mmes_.at(request.displaces).remove(cell);
    assignment_.leave(cell, request.displaces);
  }
  complete_join(cell, request.target);
  if (decision.kind == AssignmentDecision::Kind::AcceptWithEviction) {
    handle_eviction(decision.evicted, request.target, directory_.live_count());
  }
}

void Engine::handle_eviction(CellId evicted, RegionId evictor,
                             std::size_t budget) {
  log_message({clock_, MessageKind::ReassignReq, kNoUe, kNoCell, evicted,
               evictor, kNoRegion, false, HandoverClass::X2});
  std::vector<RegionId> candidates;
  if (budget > 0) {
    try {
      candidates = cells_[evicted].make_reassignment(
          evictor, assignment_.regions_of(evicted), directory_,
          region_loads());
    } catch (const SimError&) {
      ++result_.agent_errors;
    }
  }
  assignment_.leave(evicted, evictor);
  if (!walk_candidates(evicted, candidates, budget)) {
    forced_assignment(evicted, evictor);
  }
}

bool Engine::walk_candidates(CellId cell,
                             const std::vector<RegionId>& candidates,
                             std::size_t budget) {
  const auto attraction = cells_[cell].attraction(directory_);
  for (RegionId cand : candidates) {
    if (!directory_.is_live(cand) || assignment_.is_member(cell, cand)) {
      continue;
    }
    log_message({clock_, MessageKind::AssignReq, kNoUe, cell, kNoCell,
                 kNoRegion, cand, false, HandoverClass::X2});
    const double a_n = attraction ? attraction->value_or_zero(cand) : 0.0;
    AssignmentDecision decision;
    try {
      decision = mmes_.at(cand).handle_assignment_request(cell,
                                                          cell_load(cell), a_n);
    } catch (const SimError&) {
      ++result_.agent_errors;
      log_message({clock_, MessageKind::AssignRsp, kNoUe, kNoCell, cell, cand,
                   kNoRegion, false, HandoverClass::X2});
      continue;
    }
    log_message({clock_, MessageKind::AssignRsp, kNoUe, kNoCell, cell, cand,
                 kNoRegion, false, HandoverClass::X2});
    if (decision.kind == AssignmentDecision::Kind::Reject) continue;
    complete_join(cell, cand);
    if (decision.kind == AssignmentDecision::Kind::AcceptWithEviction) {
      // budget > 0 here: with budget 0 the candidate list is empty.
      handle_eviction(decision.evicted, cand, budget - 1);
    }
    return true;
  }
  return false;
}

void Engine::forced_assignment(CellId cell, RegionId excluded) {
  RegionId best = kNoRegion;
  double best_load = std::numeric_limits<double>::infinity();
  for (const auto& [id, mme] : mmes_) {
    if (id == excluded || !directory_.is_live(id) ||
        assignment_.is_member(cell, id)) {
      continue;
    }
    if (mme.load() < best_load) {
      best = id;
      best_load = mme.load();
    }
  }
  if (best == kNoRegion) {
    ++result_.dropped_memberships;
    return;
  }
  log_message({clock_, MessageKind::AssignReq, kNoUe, cell, kNoCell, kNoRegion,
               best, false, HandoverClass::X2});
  log_message({clock_, MessageKind::AssignRsp, kNoUe, kNoCell, cell, best,
               kNoRegion, false, HandoverClass::X2});
  const auto attraction = cells_[cell].attraction(directory_);
  mmes_.at(best).force_assign(cell, cell_load(cell),
                              attraction ? attraction->value_or_zero(best)
                                         : 0.0);
  complete_join(cell, best);
  ++result_.forced_assignments;
}

void Engine::complete_join(CellId cell, RegionId region) {
  assignment_.join(cell, region);
  ++result_.switches;
  recompute_primary(cell);
}

void Engine::refresh_if_due(CellId cell) {
  if (cells_[cell].recorded() % scenario_.agent.refresh_interval != 0) return;
  const auto attraction = cells_[cell].attraction(directory_);
  if (!attraction) return;
  for (RegionId r : assignment_.regions_of(cell)) {
    // Periodic attraction report; no response message is exchanged.
    log_message({clock_, MessageKind::AssignReq, kNoUe, cell, kNoCell,
                 kNoRegion, r, false, HandoverClass::X2});
    try {
      mmes_.at(r).refresh_attraction(cell, attraction->value_or_zero(r));
      if (scenario_.load_mode == CellLoadMode::ArrivalRate) {
        mmes_.at(r).update_cell_load(cell, cell_load(cell));
      }
    } catch (const SimError&) {
      ++result_.agent_errors;
    }
  }
}

void Engine::recompute_primary(CellId cell) {
  const auto& current = assignment_.regions_of(cell);
  if (current.empty()) return;
  assignment_.set_primary(cell, cells_[cell].primary_among(current, directory_));
}

double Engine::cell_load(CellId cell) const {
  if (scenario_.load_mode == CellLoadMode::Uniform) return 1.0;
  return cells_[cell].table().total();
}

std::map<RegionId, double> Engine::region_loads() const {
  std::map<RegionId, double> loads;
  for (const auto& [id, mme] : mmes_) {
    if (directory_.is_live(id)) loads[id] = mme.load();
  }
  return loads;
}

void Engine::log_message(MessageLogEntry entry) {
  ++result_.message_counts[entry.kind];
  if (entry.kind != MessageKind::HoReq && entry.kind != MessageKind::TauReq) {
    result_.assignment_signaling += scenario_.cost.msgs_assignment_change / 2.0;
    ++cur_assignment_msgs_;
  }
  if (scenario_.record.messages) result_.messages.push_back(std::move(entry));
}

void Engine::apply_scale_event(const ScaleEvent& ev) {
  if (ev.kind == ScaleEvent::Kind::Up) {
    RegionId id = directory_.create_region(ev.capacity);
    mmes_.emplace(id, MmeAgent(id, ev.capacity, scenario_.delta));
    return;
  }
  directory_.retire(ev.region);
  auto it = mmes_.find(ev.region);
  if (it == mmes_.end()) {
    throw SimError(ErrorCode::RetiredRegion,
                   "region " + std::to_string(ev.region) + " has no agent");
  }
  std::vector<CellId> held;
  held.reserve(it->second.assigned().size());
  for (const auto& [cell, load] : it->second.assigned()) {
    (void)load;
    held.push_back(cell);
  }
  for (CellId cell : held) {
    it->second.remove(cell);
    handle_eviction(cell, ev.region, directory_.live_count());
  }
  mmes_.erase(it);
}

void Engine::maybe_flush_window() {
  if (window_events_.size() >= scenario_.window) flush_window();
}

void Engine::flush_window() {
  result_.windows.push_back(compute_window(result_.windows.size(),
                                           window_events_, region_loads(),
                                           scenario_.cost));
  window_events_.clear();
}

void Engine::finish() {
  if (finished_) return;
  finished_ = true;
  if (cur_assignment_msgs_ != 0 && !window_events_.empty()) {
    // Assignment traffic from a trailing scale event folds into the last
    // partial window; totals are exact either way.
    window_events_.back().assignment_msgs += cur_assignment_msgs_;
    cur_assignment_msgs_ = 0;
  }
  if (!window_events_.empty()) flush_window();
  result_.final_primary = assignment_.primary_vector();
  result_.final_loads = region_loads();
  result_.final_capacities = directory_.live();
}

RunResult Engine::take_result() && {
  finish();
  return std::move(result_);
}

RunResult run_scenario(const Scenario& scenario) {
  validate_scenario(scenario);
  Rng topo_rng = Rng::substream(scenario.seed, "topology");
  Topology topo = build_topology(scenario.topology, topo_rng);
  std::vector<HandoverEvent> events;
  if (scenario.mobility.kind == MobilityModel::Kind::Trace) {
    events = load_trace(scenario.mobility.trace_path, topo);
    if (scenario.n_events > 0 && events.size() > scenario.n_events) {
      events.resize(scenario.n_events);
    }
  } else {
    Rng mob_rng = Rng::substream(scenario.seed, "mobility");
    events = generate_handovers(scenario.mobility, topo, scenario.n_ues,
                                scenario.n_events, mob_rng);
  }
  Engine engine(std::move(topo), scenario);
  std::size_t next_scale = 0;
  const auto& schedule = scenario.scale_events;
  for (std::size_t i = 0; i < events.size(); ++i) {
    while (next_scale < schedule.size() && schedule[next_scale].time <= i) {
      engine.apply_scale_event(schedule[next_scale]);
      ++next_scale;
    }
    engine.process_event(events[i]);
  }
  while (next_scale < schedule.size()) {
    engine.apply_scale_event(schedule[next_scale]);
    ++next_scale;
  }
  engine.finish();
  return std::move(engine).take_result();
}

}  // namespace regionsim
