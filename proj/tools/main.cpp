#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "latmpc/config.hpp"
#include "latmpc/controller.hpp"
#include "latmpc/errors.hpp"
#include "latmpc/harness.hpp"

namespace {

using namespace latmpc;

std::vector<Strategy> parse_strategies(const std::string& list) {
  std::vector<Strategy> out;
  std::istringstream is(list);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    if (tok.empty()) continue;
    const auto s = strategy_from_name(tok);
    if (!s) throw ConfigError("unknown strategy '" + tok + "'");
    out.push_back(*s);
  }
  if (out.empty()) throw ConfigError("no strategies given");
  return out;
}

ScenarioConfig load_with_seed(const std::string& config_path,
                              const std::optional<std::uint64_t>& seed) {
  ScenarioConfig cfg = load_config(config_path);
  if (seed) {
    cfg.seed = *seed;
    cfg.seed_defaulted = false;
  }
  return cfg;
}

int cmd_build(const std::string& config_path, const std::string& out_dir,
              const std::optional<std::uint64_t>& seed, const std::string& strategies) {
  const ScenarioConfig cfg = load_with_seed(config_path, seed);
  const std::vector<Strategy> todo = parse_strategies(strategies);

  const ReferenceTrajectory traj = make_trajectory(cfg);
  const TrackingSetup setup = to_setup(cfg);
  ScenarioArtifacts art = prepare_scenario(traj, setup);

  std::filesystem::create_directories(out_dir);
  std::cout << "seed: " << cfg.seed << (cfg.seed_defaulted ? " (default)" : "") << "\n";

  for (Strategy s : todo) {
    if (s == Strategy::lattice) {
      ensure_controller(art, setup, cfg.plan, cfg.seed);
      const std::string dir = (std::filesystem::path(out_dir) / "controller").string();
      save_controller(*art.controller, dir);
      long long terms = 0, literals = 0, unresolved = 0;
      for (const auto& st : art.controller->stats) {
        terms += st.terms_after;
        literals += st.literals_after;
        unresolved += st.unresolved;
      }
      std::cout << "lattice controller: " << art.controller->size() << " points, " << terms
                << " terms, " << literals << " literals, radius "
                << art.controller->radius << ", unresolved validation mismatches "
                << unresolved << "\n  saved to " << dir << "\n";
    } else if (s == Strategy::explicit_seq) {
      ensure_regions(art, cfg.plan, cfg.seed);
      const std::string path = (std::filesystem::path(out_dir) / "regions.txt").string();
      std::ofstream os(path);
      if (!os) throw RunError("cannot open " + path);
      long long total = 0;
      os << "pointsets " << art.regions->size() << "\n";
      for (const auto& lst : *art.regions) {
        write_regions(os, lst);
        total += static_cast<long long>(lst.size());
      }
      std::cout << "explicit regions: " << total << " regions over " << art.regions->size()
                << " points\n  saved to " << path << "\n";
    } else {
      std::cout << "linear_mpc: no offline artifacts (QPs are solved online)\n";
    }
  }
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::optional<std::uint64_t>& seed, const std::string& strategies) {
  const ScenarioConfig cfg = load_with_seed(config_path, seed);
  const std::vector<Strategy> todo = parse_strategies(strategies);
  if (todo.size() != 1) throw ConfigError("run expects exactly one strategy");

  const ReferenceTrajectory traj = make_trajectory(cfg);
  const TrackingSetup setup = to_setup(cfg);
  ScenarioArtifacts art = prepare_scenario(traj, setup);

  std::filesystem::create_directories(out_dir);
  const Strategy s = todo.front();
  if (s == Strategy::lattice) {
    // Reuse a persisted controller when one matches this trajectory.
    const std::string dir = (std::filesystem::path(out_dir) / "controller").string();
    if (std::filesystem::exists(std::filesystem::path(dir) / "manifest.txt")) {
      art.controller = load_controller(dir, traj);
    } else {
      ensure_controller(art, setup, cfg.plan, cfg.seed);
    }
  } else if (s == Strategy::explicit_seq) {
    ensure_regions(art, cfg.plan, cfg.seed);
  }

  const TrackingResult run = run_tracking(s, art, setup, cfg.initial_state);
  const std::string csv = (std::filesystem::path(out_dir) / (strategy_name(s) + ".csv")).string();
  write_run_csv(csv, traj, run);
  std::cout << "seed: " << cfg.seed << (cfg.seed_defaulted ? " (default)" : "") << "\n";
  std::cout << strategy_name(s) << ": average position error " << run.average_error
            << " m over " << run.states.size() << " steps, "
            << run.constraint_violations << " state-bound violations\n  wrote " << csv << "\n";
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_dir,
                const std::optional<std::uint64_t>& seed, const std::string& strategies) {
  const ScenarioConfig cfg = load_with_seed(config_path, seed);
  const ComparisonReport report = run_compare(cfg, parse_strategies(strategies), out_dir);
  format_report(std::cout, report);
  std::cout << "wrote " << out_dir << "/report.csv\n";
  return 0;
}

int cmd_plotdata(const std::string& out_dir, const std::string& strategies) {
  std::vector<std::string> paths;
  for (Strategy s : parse_strategies(strategies)) {
    const auto p = std::filesystem::path(out_dir) / (strategy_name(s) + ".csv");
    if (std::filesystem::exists(p)) paths.push_back(p.string());
  }
  if (paths.empty()) {
    throw RunError("plotdata: no run CSV files found in " + out_dir +
                   " for the requested strategies");
  }
  const std::string out = (std::filesystem::path(out_dir) / "plot.csv").string();
  emit_plot_data(paths, out);
  std::cout << "wrote " << out << " from " << paths.size() << " run file(s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory-tracking MPC toolkit: lattice piecewise-affine controllers, "
               "online linear MPC and explicit MPC with sequential search"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::string strategies = "lattice,linear_mpc,explicit_seq";

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      sub->add_option("--config", config_path, "scenario config file")->required();
      sub->add_option("--seed", seed, "override rng.seed from the config");
    }
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--strategies", strategies,
                    "comma-separated subset of lattice,linear_mpc,explicit_seq");
  };

  CLI::App* build = app.add_subcommand("build", "build and persist offline artifacts");
  add_common(build, true);
  CLI::App* run = app.add_subcommand("run", "run one strategy closed-loop");
  add_common(run, true);
  CLI::App* compare = app.add_subcommand("compare", "run strategies and compare");
  add_common(compare, true);
  CLI::App* plotdata = app.add_subcommand("plotdata", "merge run CSVs into plot.csv");
  add_common(plotdata, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // usage problems map to the config exit code
  }

  try {
    if (build->parsed()) return cmd_build(config_path, out_dir, seed, strategies);
    if (run->parsed()) return cmd_run(config_path, out_dir, seed, strategies);
    if (compare->parsed()) return cmd_compare(config_path, out_dir, seed, strategies);
    if (plotdata->parsed()) return cmd_plotdata(out_dir, strategies);
  } catch (const latmpc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const latmpc::BuildError& e) {
    std::cerr << "build error: " << e.what() << "\n";
    return 2;
  } catch (const latmpc::RunError& e) {
    std::cerr << "run error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
