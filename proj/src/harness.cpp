#include "latmpc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "latmpc/errors.hpp"

namespace latmpc {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double mean_us(const std::vector<std::int64_t>& ns) {
  if (ns.empty()) return 0.0;
  double acc = 0.0;
  for (auto v : ns) acc += static_cast<double>(v);
  return acc / static_cast<double>(ns.size()) / 1000.0;
}

double median_us(std::vector<std::int64_t> ns) {
  if (ns.empty()) return 0.0;
  std::sort(ns.begin(), ns.end());
  const size_t h = ns.size() / 2;
  const double m = ns.size() % 2 ? static_cast<double>(ns[h])
                                 : 0.5 * (static_cast<double>(ns[h - 1]) + static_cast<double>(ns[h]));
  return m / 1000.0;
}

double max_us(const std::vector<std::int64_t>& ns) {
  if (ns.empty()) return 0.0;
  return static_cast<double>(*std::max_element(ns.begin(), ns.end())) / 1000.0;
}

// Minimal CSV reader for the files this module writes itself.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

CsvTable read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw RunError("emit_plot_data: cannot open " + path);
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size()) {
        throw RunError("emit_plot_data: ragged row in " + path);
      }
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw RunError("emit_plot_data: empty file " + path);
  return t;
}

}  // namespace

void write_run_csv(const std::string& path, const ReferenceTrajectory& traj,
                   const TrackingResult& result) {
  const int count = static_cast<int>(result.states.size());
  if (traj.size() < count) throw RunError("write_run_csv: trajectory shorter than run");

  std::ofstream os(path);
  if (!os) throw RunError("write_run_csv: cannot open " + path);
  os << "step,time,x_ref,y_ref,phi_ref,v_ref,steer_ref,x,y,phi,v,steer,"
        "position_error,eval_time_ns\n";
  for (int k = 0; k < count; ++k) {
    const ReferencePoint& r = traj.points[k];
    const State& s = result.states[k];
    const Control& u = result.controls[k];
    os << k << ',' << fmt(k * traj.period) << ',' << fmt(r.state.x) << ',' << fmt(r.state.y)
       << ',' << fmt(r.state.phi) << ',' << fmt(r.control.v) << ',' << fmt(r.control.steer)
       << ',' << fmt(s.x) << ',' << fmt(s.y) << ',' << fmt(s.phi) << ',' << fmt(u.v) << ','
       << fmt(u.steer) << ',' << fmt(result.position_error[k]) << ','
       << result.eval_time_ns[k] << "\n";
  }
  if (!os) throw RunError("write_run_csv: write failed for " + path);
}

ComparisonReport run_compare(const ScenarioConfig& cfg,
                             const std::vector<Strategy>& strategies,
                             const std::string& out_dir) {
  if (strategies.empty()) throw ConfigError("run_compare: no strategies requested");
  std::vector<Strategy> todo;
  for (Strategy s : strategies) {
    if (std::find(todo.begin(), todo.end(), s) == todo.end()) todo.push_back(s);
  }

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw RunError("run_compare: cannot create " + out_dir + ": " + ec.message());

  const ReferenceTrajectory traj = make_trajectory(cfg);
  const TrackingSetup setup = to_setup(cfg);
  ScenarioArtifacts art = prepare_scenario(traj, setup);

  using clock = std::chrono::steady_clock;
  double lattice_offline = 0.0, regions_offline = 0.0;
  if (std::find(todo.begin(), todo.end(), Strategy::lattice) != todo.end()) {
    const auto t0 = clock::now();
    ensure_controller(art, setup, cfg.plan, cfg.seed);
    lattice_offline = std::chrono::duration<double>(clock::now() - t0).count();
  }
  if (std::find(todo.begin(), todo.end(), Strategy::explicit_seq) != todo.end()) {
    const auto t0 = clock::now();
    ensure_regions(art, cfg.plan, cfg.seed);
    regions_offline = std::chrono::duration<double>(clock::now() - t0).count();
  }

  ComparisonReport report;
  report.seed = cfg.seed;
  report.seed_defaulted = cfg.seed_defaulted;

  for (Strategy s : todo) {
    const TrackingResult run = run_tracking(s, art, setup, cfg.initial_state);
    StrategyReport row;
    row.strategy = s;
    row.average_error = run.average_error;
    row.constraint_violations = run.constraint_violations;
    row.fallbacks = run.fallback_count;
    row.online_mean_us = mean_us(run.eval_time_ns);
    row.online_median_us = median_us(run.eval_time_ns);
    row.online_max_us = max_us(run.eval_time_ns);
    if (s == Strategy::lattice) {
      row.offline_seconds = lattice_offline;
      for (const auto& pair : art.controller->laws) {
        row.terms += pair[0].term_count() + pair[1].term_count();
        row.literals += pair[0].literal_count() + pair[1].literal_count();
      }
    } else if (s == Strategy::explicit_seq) {
      row.offline_seconds = regions_offline;
      for (const auto& lst : *art.regions) row.regions += static_cast<long long>(lst.size());
    }
    row.csv_path = (fs::path(out_dir) / (strategy_name(s) + ".csv")).string();
    write_run_csv(row.csv_path, traj, run);
    report.rows.push_back(std::move(row));
  }

  write_report_csv((fs::path(out_dir) / "report.csv").string(), report);
  return report;
}

void emit_plot_data(const std::vector<std::string>& run_csv_paths,
                    const std::string& out_path) {
  if (run_csv_paths.empty()) throw RunError("emit_plot_data: no input files");

  std::vector<CsvTable> tables;
  std::vector<std::string> names;
  for (const auto& path : run_csv_paths) {
    tables.push_back(read_csv(path));
    names.push_back(std::filesystem::path(path).stem().string());
  }

  const size_t rows = tables.front().rows.size();
  for (const auto& t : tables) {
    if (t.rows.size() != rows) {
      throw RunError("emit_plot_data: input files disagree on row count");
    }
    for (const char* col : {"x_ref", "y_ref", "x", "y"}) {
      if (t.column(col) < 0) {
        throw RunError(std::string("emit_plot_data: missing column ") + col);
      }
    }
  }

  std::ofstream os(out_path);
  if (!os) throw RunError("emit_plot_data: cannot open " + out_path);
  os << "step,x_ref,y_ref";
  for (const auto& n : names) os << ",x_" << n << ",y_" << n;
  os << "\n";
  const CsvTable& ref = tables.front();
  const int xr = ref.column("x_ref"), yr = ref.column("y_ref");
  for (size_t r = 0; r < rows; ++r) {
    os << r << ',' << ref.rows[r][xr] << ',' << ref.rows[r][yr];
    for (const auto& t : tables) {
      os << ',' << t.rows[r][t.column("x")] << ',' << t.rows[r][t.column("y")];
    }
    os << "\n";
  }
  if (!os) throw RunError("emit_plot_data: write failed for " + out_path);
}

void format_report(std::ostream& os, const ComparisonReport& report) {
  os << "seed: " << report.seed << (report.seed_defaulted ? " (default)" : "") << "\n";
  os << std::left << std::setw(14) << "strategy" << std::right << std::setw(12) << "avg_err_m"
     << std::setw(12) << "mean_us" << std::setw(12) << "median_us" << std::setw(12) << "max_us"
     << std::setw(12) << "offline_s" << std::setw(10) << "viol" << std::setw(10) << "fallback"
     << std::setw(10) << "terms" << std::setw(10) << "lits" << std::setw(10) << "regions"
     << "\n";
  for (const auto& row : report.rows) {
    os << std::left << std::setw(14) << strategy_name(row.strategy) << std::right << std::fixed
       << std::setprecision(5) << std::setw(12) << row.average_error << std::setprecision(2)
       << std::setw(12) << row.online_mean_us << std::setw(12) << row.online_median_us
       << std::setw(12) << row.online_max_us << std::setprecision(3) << std::setw(12)
       << row.offline_seconds << std::setw(10) << row.constraint_violations << std::setw(10)
       << row.fallbacks << std::setw(10) << row.terms << std::setw(10) << row.literals
       << std::setw(10) << row.regions << "\n";
    os.unsetf(std::ios::fixed);
  }
}

void write_report_csv(const std::string& path, const ComparisonReport& report) {
  std::ofstream os(path);
  if (!os) throw RunError("write_report_csv: cannot open " + path);
  os << "strategy,average_error,online_mean_us,online_median_us,online_max_us,"
        "offline_seconds,constraint_violations,fallbacks,terms,literals,regions,seed\n";
  for (const auto& row : report.rows) {
    os << strategy_name(row.strategy) << ',' << fmt(row.average_error) << ','
       << fmt(row.online_mean_us) << ',' << fmt(row.online_median_us) << ','
       << fmt(row.online_max_us) << ',' << fmt(row.offline_seconds) << ','
       << row.constraint_violations << ',' << row.fallbacks << ',' << row.terms << ','
       << row.literals << ',' << row.regions << ',' << report.seed << "\n";
  }
  if (!os) throw RunError("write_report_csv: write failed");
}

}  // namespace latmpc
