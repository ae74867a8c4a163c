// Command-line front end: run / sweep / oracle / report subcommands over the
// simulator library. Exit codes: 0 success, 1 runtime failure, 2 bad usage or
// configuration.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "regionsim/commands.hpp"

namespace {

int parse_mode(const std::string& text, regionsim::AlgorithmMode& out) {
  if (text == "active") {
    out = regionsim::AlgorithmMode::Active;
    return 0;
  }
  if (text == "frozen") {
    out = regionsim::AlgorithmMode::Frozen;
    return 0;
  }
  std::cerr << "config error: mode must be active or frozen, got '" << text
            << "'\n";
  return regionsim::kExitConfig;
}

int parse_oracle_mode(const std::string& text, regionsim::OracleMode& out) {
  if (text == "exhaustive") {
    out = regionsim::OracleMode::Exhaustive;
    return 0;
  }
  if (text == "bnb") {
    out = regionsim::OracleMode::BranchAndBound;
    return 0;
  }
  std::cerr << "config error: oracle mode must be exhaustive or bnb, got '"
            << text << "'\n";
  return regionsim::kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agent-based handover region simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run one scenario");
  regionsim::RunOptions run_opts;
  std::uint64_t run_seed = 0;
  std::string run_mode;
  std::string run_oracle;
  run->add_option("--scenario", run_opts.scenario_path, "scenario JSON file")
      ->required();
  run->add_option("--out", run_opts.out_dir, "output directory")->required();
  auto* run_seed_opt =
      run->add_option("--seed", run_seed, "override the scenario seed");
  run->add_option("--mode", run_mode, "override the mode (active|frozen)");
  run->add_option("--oracle", run_oracle,
                  "also solve the realized flow (exhaustive|bnb)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run one scenario over many seeds");
  regionsim::SweepOptions sweep_opts;
  sweep->add_option("--scenario", sweep_opts.scenario_path,
                    "scenario JSON file")
      ->required();
  sweep->add_option("--out", sweep_opts.out_dir, "output directory")
      ->required();
  sweep->add_option("--seeds", sweep_opts.seeds, "seed list")
      ->required()
      ->delimiter(',');
  sweep->add_option("--parallel", sweep_opts.parallel, "worker thread count");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "exact min-cut partition");
  regionsim::OracleOptions oracle_opts;
  std::string oracle_mode = "exhaustive";
  oracle->add_option("--flow", oracle_opts.flow_csv, "flow matrix CSV");
  oracle->add_option("--run-dir", oracle_opts.run_dir,
                     "run directory holding flow.csv");
  oracle->add_option("--regions", oracle_opts.n_regions, "region count")
      ->required();
  oracle->add_option("--capacity", oracle_opts.capacity,
                     "cells per region bound")
      ->required();
  oracle->add_option("--mode", oracle_mode, "exhaustive|bnb");
  oracle->add_option("--out", oracle_opts.out, "partition JSON path");

  // report
  auto* report = app.add_subcommand("report", "tabulate run summaries");
  regionsim::ReportOptions report_opts;
  report->add_option("dirs", report_opts.run_dirs, "run directories")
      ->required();
  report->add_option("--out", report_opts.out_csv, "also write a CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "config error: " << e.what() << "\n";
    return regionsim::kExitConfig;
  }

  if (run->parsed()) {
    if (run_seed_opt->count() > 0) run_opts.seed = run_seed;
    if (!run_mode.empty()) {
      regionsim::AlgorithmMode mode;
      if (int rc = parse_mode(run_mode, mode)) return rc;
      run_opts.mode = mode;
    }
    if (!run_oracle.empty()) {
      regionsim::OracleMode mode;
      if (int rc = parse_oracle_mode(run_oracle, mode)) return rc;
      run_opts.oracle = mode;
    }
    return regionsim::cmd_run(run_opts);
  }
  if (sweep->parsed()) return regionsim::cmd_sweep(sweep_opts);
  if (oracle->parsed()) {
    if (int rc = parse_oracle_mode(oracle_mode, oracle_opts.mode)) return rc;
    return regionsim::cmd_oracle(oracle_opts);
  }
  if (report->parsed()) return regionsim::cmd_report(report_opts);
  return regionsim::kExitConfig;
}
