#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regionsim/engine.hpp"
#include "regionsim/scenario.hpp"

namespace regionsim {

/// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

struct RunOptions {
  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;      // overrides the scenario seed
  std::optional<AlgorithmMode> mode;      // overrides the scenario mode
  std::optional<OracleMode> oracle;       // also solve the realized flow
};

/// Runs one scenario; writes metrics.csv, summary.json, and optional
/// messages.csv / flow.csv into out_dir; prints a one-line summary.
int cmd_run(const RunOptions& options);

struct SweepOptions {
  std::string scenario_path;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;
  unsigned parallel = 1;
};

/// One run per seed under out_dir/seed_<s>/, plus sweep.csv and
/// aggregate.json. Aggregates are computed in seed order after all runs
/// finish, so they are invariant to the parallelism level.
int cmd_sweep(const SweepOptions& options);

struct OracleOptions {
  std::string flow_csv;  // exactly one of flow_csv / run_dir
  std::string run_dir;
  std::uint32_t n_regions = 1;
  double capacity = 0.0;
  OracleMode mode = OracleMode::Exhaustive;
  std::string out;  // partition JSON path; default <input dir>/partition.json
};

int cmd_oracle(const OracleOptions& options);

struct ReportOptions {
  std::vector<std::string> run_dirs;
  std::string out_csv;  // empty: print the table only
};

/// Merges run summaries into a comparison table (one row per run), printed
/// as plain text and optionally written as CSV.
int cmd_report(const ReportOptions& options);

/// Shared by cmd_run and cmd_sweep; returns the paths written.
std::vector<std::string> write_run_outputs(const std::string& out_dir,
                                           const Scenario& scenario,
                                           const RunResult& result,
                                           std::optional<OracleMode> oracle);

}  // namespace regionsim
