#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "latmpc/config.hpp"
#include "latmpc/controller.hpp"

namespace latmpc {

// Summary of one strategy's offline and closed-loop behaviour.
struct StrategyReport {
  Strategy strategy = Strategy::lattice;
  double offline_seconds = 0.0;  // artifact construction time (0 for linear_mpc)
  double online_mean_us = 0.0;
  double online_median_us = 0.0;
  double online_max_us = 0.0;
  double average_error = 0.0;
  int constraint_violations = 0;
  int fallbacks = 0;          // explicit_seq only
  long long terms = 0;        // lattice only: total max-min terms
  long long literals = 0;     // lattice only: total distinct literals
  long long regions = 0;      // explicit_seq only: total stored regions
  std::string csv_path;
};

struct ComparisonReport {
  std::uint64_t seed = 0;
  bool seed_defaulted = false;
  std::vector<StrategyReport> rows;
};

// Write one closed-loop run as CSV (reference, visited state, applied input,
// position error, per-step evaluation time).
void write_run_csv(const std::string& path, const ReferenceTrajectory& traj,
                   const TrackingResult& result);

// Build the scenario, run every requested strategy on it, write one CSV per
// strategy plus report.csv into out_dir, and return the collected summaries.
ComparisonReport run_compare(const ScenarioConfig& cfg,
                             const std::vector<Strategy>& strategies,
                             const std::string& out_dir);

// Merge per-strategy run CSVs into one table (reference path plus each
// strategy's visited positions) ready for plotting.
void emit_plot_data(const std::vector<std::string>& run_csv_paths,
                    const std::string& out_path);

// Human-readable table of a comparison report.
void format_report(std::ostream& os, const ComparisonReport& report);

// Machine-readable version used for report.csv.
void write_report_csv(const std::string& path, const ComparisonReport& report);

}  // namespace latmpc
