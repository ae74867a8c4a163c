#include "regionsim/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace regionsim {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Steady-state ratio: mean over the last quarter of the windows (at least
/// one). Falls back to the whole-run ratio when no window closed.
double steady_ratio(const RunResult& result) {
  if (result.windows.empty()) return result.overall_ratio();
  const std::size_t n = result.windows.size();
  const std::size_t tail = std::max<std::size_t>(1, n / 4);
  double sum = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) sum += result.windows[i].ratio;
  return sum / static_cast<double>(tail);
}

constexpr double kConvergenceTol = 0.02;

/// Capacity handed to the oracle when solving a run's realized flow: the
/// largest final capacity (the oracle takes a single uniform bound).
double max_capacity_for_oracle(const RunResult& result) {
  double cap = 0.0;
  for (const auto& [region, c] : result.final_capacities) {
    cap = std::max(cap, c);
  }
  return cap;
}

std::vector<double> ratio_series(const RunResult& result) {
  std::vector<double> series;
  series.reserve(result.windows.size());
  for (const auto& w : result.windows) series.push_back(w.ratio);
  return series;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw SimError(ErrorCode::IoError, "cannot write " + path);
  }
  out << content;
}

ordered_json summary_json(const Scenario& scenario, const RunResult& result,
                          std::optional<OracleMode> oracle_mode) {
  ordered_json j;
  j["digest"] = scenario_digest(scenario);
  j["seed"] = scenario.seed;
  j["mode"] = scenario.mode == AlgorithmMode::Active ? "active" : "frozen";
  j["n_cells"] = result.final_primary.size();
  j["n_events"] = result.events;
  j["window"] = scenario.window;
  j["handovers"]["x2"] = result.x2;
  j["handovers"]["s1_intra"] = result.s1_intra;
  j["handovers"]["s1_inter"] = result.s1_inter;
  j["overall_ratio"] = result.overall_ratio();
  j["final_ratio"] = steady_ratio(result);
  auto convergence = convergence_time(ratio_series(result), kConvergenceTol);
  if (convergence) {
    j["convergence_window"] = *convergence;
  } else {
    j["convergence_window"] = nullptr;
  }
  j["signaling"]["handover"] = result.handover_signaling;
  j["signaling"]["assignment"] = result.assignment_signaling;
  j["signaling"]["total"] = result.total_signaling();
  ordered_json msgs;
  for (const auto& [kind, count] : result.message_counts) {
    msgs[to_string(kind)] = count;
  }
  j["messages"] = msgs;
  j["switches"] = result.switches;
  j["forced_assignments"] = result.forced_assignments;
  j["dropped_memberships"] = result.dropped_memberships;
  j["agent_errors"] = result.agent_errors;
  std::vector<double> loads;
  ordered_json loads_json;
  for (const auto& [region, load] : result.final_loads) {
    loads.push_back(load);
    loads_json[std::to_string(region)] = load;
  }
  j["jain_final"] = jain_index(loads);
  j["max_load_final"] = loads.empty()
                            ? 0.0
                            : *std::max_element(loads.begin(), loads.end());
  j["final_loads"] = loads_json;
  j["partition"] = result.final_primary;
  if (oracle_mode && result.flow) {
    OracleResult oracle = oracle_partition(
        *result.flow, static_cast<std::uint32_t>(result.final_loads.size()),
        max_capacity_for_oracle(result), *oracle_mode);
    j["oracle"]["cut"] = oracle.cut;
    const double total = result.flow->total();
    j["oracle"]["ratio"] = total == 0.0 ? 0.0 : oracle.cut / total;
    j["oracle"]["mode"] =
        *oracle_mode == OracleMode::Exhaustive ? "exhaustive" : "bnb";
  }
  return j;
}

}  // namespace

std::vector<std::string> write_run_outputs(const std::string& out_dir,
                                           const Scenario& scenario,
                                           const RunResult& result,
                                           std::optional<OracleMode> oracle) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw SimError(ErrorCode::IoError,
                   "cannot create " + out_dir + ": " + ec.message());
  }
  std::vector<std::string> written;

  const std::string metrics_path = (fs::path(out_dir) / "metrics.csv").string();
  write_metrics_csv(metrics_path, result.windows);
  written.push_back(metrics_path);

  const std::string summary_path = (fs::path(out_dir) / "summary.json").string();
  write_text_file(summary_path,
                  summary_json(scenario, result, oracle).dump(2) + "\n");
  written.push_back(summary_path);

  if (result.flow) {
    const std::string flow_path = (fs::path(out_dir) / "flow.csv").string();
    result.flow->save_csv(flow_path);
    written.push_back(flow_path);
  }
  if (!result.messages.empty() || scenario.record.messages) {
    const std::string msg_path = (fs::path(out_dir) / "messages.csv").string();
    std::ostringstream body;
    body << kMessageCsvHeader << "\n";
    for (const auto& entry : result.messages) body << entry.csv_row() << "\n";
    write_text_file(msg_path, body.str());
    written.push_back(msg_path);
  }
  return written;
}

int cmd_run(const RunOptions& options) {
  Scenario scenario;
  try {
    scenario = load_scenario(options.scenario_path);
    if (options.seed) scenario.seed = *options.seed;
    if (options.mode) scenario.mode = *options.mode;
    validate_scenario(scenario);
  } catch (const SimError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    RunResult result = run_scenario(scenario);
    write_run_outputs(options.out_dir, scenario, result, options.oracle);
    auto convergence = convergence_time(ratio_series(result), kConvergenceTol);
    std::cout << "events=" << result.events
              << " final_ratio=" << format_number(steady_ratio(result))
              << " overall_ratio=" << format_number(result.overall_ratio())
              << " signaling=" << format_number(result.total_signaling())
              << " convergence="
              << (convergence ? std::to_string(*convergence) : std::string("-"))
              << "\n";
    return kExitOk;
  } catch (const SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

namespace {

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double final_ratio = 0.0;
  double overall_ratio = 0.0;
  std::optional<std::uint64_t> convergence;
  double signaling_total = 0.0;
  std::uint64_t assignment_messages = 0;
  std::uint64_t switches = 0;
  std::uint64_t forced = 0;
};

}  // namespace

int cmd_sweep(const SweepOptions& options) {
  Scenario base;
  try {
    base = load_scenario(options.scenario_path);
    if (options.seeds.empty()) {
      throw SimError(ErrorCode::ConfigError, "sweep needs at least one seed");
    }
  } catch (const SimError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create " << options.out_dir << ": "
              << ec.message() << "\n";
    return kExitRuntime;
  }

  std::vector<SeedOutcome> outcomes(options.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= options.seeds.size()) return;
      SeedOutcome& out = outcomes[i];
      out.seed = options.seeds[i];
      try {
        Scenario scenario = base;
        scenario.seed = out.seed;
        RunResult result = run_scenario(scenario);
        const std::string dir =
            (fs::path(options.out_dir) / ("seed_" + std::to_string(out.seed)))
                .string();
        write_run_outputs(dir, scenario, result, std::nullopt);
        out.ok = true;
        out.final_ratio = steady_ratio(result);
        out.overall_ratio = result.overall_ratio();
        out.convergence =
            convergence_time(ratio_series(result), kConvergenceTol);
        out.signaling_total = result.total_signaling();
        std::uint64_t assignment_msgs = 0;
        for (const auto& [kind, count] : result.message_counts) {
          if (kind != MessageKind::HoReq && kind != MessageKind::TauReq) {
            assignment_msgs += count;
          }
        }
        out.assignment_messages = assignment_msgs;
        out.switches = result.switches;
        out.forced = result.forced_assignments;
      } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
      }
    }
  };

  const unsigned n_threads = std::max(
      1u, std::min<unsigned>(options.parallel,
                             static_cast<unsigned>(options.seeds.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Aggregation sticks to seed order: identical output at any parallelism.
  std::ostringstream csv;
  csv << "seed,final_ratio,overall_ratio,convergence_window,signaling_total,"
         "assignment_messages,switches,forced_assignments\n";
  std::vector<double> ratios;
  std::vector<double> signalings;
  std::vector<std::uint64_t> convergences;
  std::vector<std::uint64_t> failed;
  for (const auto& out : outcomes) {
    if (!out.ok) {
      failed.push_back(out.seed);
      continue;
    }
    csv << out.seed << "," << format_number(out.final_ratio) << ","
        << format_number(out.overall_ratio) << ","
        << (out.convergence ? std::to_string(*out.convergence)
                            : std::string())
        << "," << format_number(out.signaling_total) << ","
        << out.assignment_messages << "," << out.switches << "," << out.forced
        << "\n";
    ratios.push_back(out.final_ratio);
    signalings.push_back(out.signaling_total);
    if (out.convergence) convergences.push_back(*out.convergence);
  }

  auto mean_of = [](const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
  };
  auto stddev_of = [&](const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
  };

  ordered_json agg;
  agg["digest"] = scenario_digest(base);
  agg["n_seeds"] = options.seeds.size();
  agg["seeds"] = options.seeds;
  agg["failed_seeds"] = failed;
  agg["final_ratio"]["mean"] = mean_of(ratios);
  agg["final_ratio"]["stddev"] = stddev_of(ratios);
  agg["signaling_total"]["mean"] = mean_of(signalings);
  agg["signaling_total"]["stddev"] = stddev_of(signalings);
  agg["convergence"]["converged"] = convergences.size();
  if (!convergences.empty()) {
    double s = 0.0;
    for (auto w : convergences) s += static_cast<double>(w);
    agg["convergence"]["mean_window"] =
        s / static_cast<double>(convergences.size());
  } else {
    agg["convergence"]["mean_window"] = nullptr;
  }

  try {
    write_text_file((fs::path(options.out_dir) / "sweep.csv").string(),
                    csv.str());
    write_text_file((fs::path(options.out_dir) / "aggregate.json").string(),
                    agg.dump(2) + "\n");
  } catch (const SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }

  for (const auto& out : outcomes) {
    if (!out.ok) {
      std::cerr << "seed " << out.seed << " failed: " << out.error << "\n";
    }
  }
  std::cout << "seeds=" << options.seeds.size() - failed.size() << "/"
            << options.seeds.size()
            << " final_ratio_mean=" << format_number(mean_of(ratios))
            << " signaling_mean=" << format_number(mean_of(signalings))
            << "\n";
  return failed.empty() ? kExitOk : kExitRuntime;
}

int cmd_oracle(const OracleOptions& options) {
  const bool have_flow = !options.flow_csv.empty();
  const bool have_dir = !options.run_dir.empty();
  if (have_flow == have_dir) {
    std::cerr << "config error: give exactly one of a flow CSV or a run dir\n";
    return kExitConfig;
  }
  if (options.n_regions == 0 || options.capacity <= 0.0) {
    std::cerr << "config error: need a positive region count and capacity\n";
    return kExitConfig;
  }
  try {
    std::string flow_path = options.flow_csv;
    if (have_dir) {
      flow_path = (fs::path(options.run_dir) / "flow.csv").string();
    }
    FlowMatrix flow = FlowMatrix::load_csv(flow_path);
    OracleResult oracle =
        oracle_partition(flow, options.n_regions, options.capacity,
                         options.mode);
    std::string out_path = options.out;
    if (out_path.empty()) {
      out_path =
          (fs::path(flow_path).parent_path() / "partition.json").string();
    }
    ordered_json j;
    j["n_regions"] = options.n_regions;
    j["capacity"] = options.capacity;
    j["mode"] = options.mode == OracleMode::Exhaustive ? "exhaustive" : "bnb";
    j["cut"] = oracle.cut;
    const double total = flow.total();
    j["ratio"] = total == 0.0 ? 0.0 : oracle.cut / total;
    j["region_of"] = oracle.partition.region_of;
    write_text_file(out_path, j.dump(2) + "\n");
    std::cout << "cut=" << format_number(oracle.cut)
              << " ratio=" << format_number(total == 0.0 ? 0.0
                                                         : oracle.cut / total)
              << " out=" << out_path << "\n";
    return kExitOk;
  } catch (const SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_report(const ReportOptions& options) {
  if (options.run_dirs.empty()) {
    std::cerr << "config error: report needs at least one run dir\n";
    return kExitConfig;
  }
  struct Row {
    std::string dir;
    std::string mode;
    double final_ratio = 0.0;
    double overall_ratio = 0.0;
    std::string convergence = "-";
    double signaling = 0.0;
    std::string oracle_cut = "-";
  };
  std::vector<Row> rows;
  for (const auto& dir : options.run_dirs) {
    const std::string path = (fs::path(dir) / "summary.json").string();
    std::ifstream in(path);
    if (!in) {
      std::cerr << "error: missing summary in " << dir << "\n";
      return kExitRuntime;
    }
    nlohmann::json j;
    try {
      in >> j;
      Row row;
      row.dir = dir;
      row.mode = j.value("mode", std::string("?"));
      row.final_ratio = j.value("final_ratio", 0.0);
      row.overall_ratio = j.value("overall_ratio", 0.0);
      if (j.contains("convergence_window") &&
          !j["convergence_window"].is_null()) {
        row.convergence =
            std::to_string(j["convergence_window"].get<std::uint64_t>());
      }
      if (j.contains("signaling")) {
        row.signaling = j["signaling"].value("total", 0.0);
      }
      if (j.contains("oracle")) {
        row.oracle_cut = format_number(j["oracle"].value("cut", 0.0));
      }
      rows.push_back(row);
    } catch (const std::exception& e) {
      std::cerr << "error: bad summary in " << dir << ": " << e.what() << "\n";
      return kExitRuntime;
    }
  }

  std::ostringstream table;
  table << "run"
        << "\tmode"
        << "\tfinal_ratio"
        << "\toverall_ratio"
        << "\tconvergence"
        << "\tsignaling"
        << "\toracle_cut\n";
  std::ostringstream csv;
  csv << "run,mode,final_ratio,overall_ratio,convergence_window,"
         "signaling_total,oracle_cut\n";
  for (const auto& row : rows) {
    table << row.dir << "\t" << row.mode << "\t"
          << format_number(row.final_ratio) << "\t"
          << format_number(row.overall_ratio) << "\t" << row.convergence
          << "\t" << format_number(row.signaling) << "\t" << row.oracle_cut
          << "\n";
    csv << row.dir << "," << row.mode << "," << format_number(row.final_ratio)
        << "," << format_number(row.overall_ratio) << ","
        << (row.convergence == "-" ? std::string() : row.convergence) << ","
        << format_number(row.signaling) << ","
        << (row.oracle_cut == "-" ? std::string() : row.oracle_cut) << "\n";
  }
  std::cout << table.str();
  if (!options.out_csv.empty()) {
    try {
      write_text_file(options.out_csv, csv.str());
    } catch (const SimError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  return kExitOk;
}

}  // namespace regionsim
