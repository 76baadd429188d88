#include "latmpc/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "latmpc/errors.hpp"

namespace latmpc {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct RawConfig {
  std::map<std::string, std::pair<std::string, int>> entries;  // key -> (value, line)

  bool has(const std::string& key) const { return entries.count(key) != 0; }
};

[[noreturn]] void fail_line(int line, const std::string& msg) {
  std::ostringstream os;
  os << "config line " << line << ": " << msg;
  throw ConfigError(os.str());
}

// Parse exactly `n` doubles from the value string.
template <typename Vec>
Vec parse_vec(const RawConfig& raw, const std::string& key, int n) {
  const auto& [value, line] = raw.entries.at(key);
  std::istringstream is(value);
  Vec v(n);
  for (int i = 0; i < n; ++i) {
    if (!(is >> v(i))) fail_line(line, "key '" + key + "' needs " + std::to_string(n) + " numbers");
  }
  std::string rest;
  if (is >> rest) fail_line(line, "key '" + key + "' has trailing content");
  return v;
}

double parse_double(const RawConfig& raw, const std::string& key) {
  return parse_vec<VecX>(raw, key, 1)(0);
}

long long parse_int(const RawConfig& raw, const std::string& key) {
  const auto& [value, line] = raw.entries.at(key);
  std::istringstream is(value);
  long long v = 0;
  std::string rest;
  if (!(is >> v) || (is >> rest)) fail_line(line, "key '" + key + "' needs one integer");
  return v;
}

std::uint64_t parse_u64(const RawConfig& raw, const std::string& key) {
  const auto& [value, line] = raw.entries.at(key);
  std::istringstream is(value);
  std::uint64_t v = 0;
  std::string rest;
  if (!(is >> v) || (is >> rest)) fail_line(line, "key '" + key + "' needs one unsigned integer");
  return v;
}

}  // namespace

ScenarioConfig parse_config(std::istream& is) {
  static const char* known[] = {
      "scenario.shape",          "scenario.radius",
      "scenario.revolutions",    "scenario.amplitude_x",
      "scenario.amplitude_y",    "scenario.period",
      "scenario.points",         "robot.wheelbase",
      "mpc.horizon",             "mpc.state_weight",
      "mpc.input_weight",        "bounds.state_min",
      "bounds.state_max",        "bounds.input_min",
      "bounds.input_max",        "run.initial_state",
      "sampling.samples_per_point", "sampling.radius",
      "sampling.resample_tolerance", "sampling.resample_budget",
      "sampling.validation_grid", "linearization.delta_threshold",
      "rng.seed",
  };

  RawConfig raw;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail_line(lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail_line(lineno, "expected 'key = value'");

    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail_line(lineno, "unknown key '" + key + "'");
    if (raw.has(key)) fail_line(lineno, "duplicate key '" + key + "'");
    raw.entries.emplace(key, std::make_pair(value, lineno));
  }

  auto require = [&](const std::string& key) {
    if (!raw.has(key)) throw ConfigError("config: missing required key '" + key + "'");
  };

  ScenarioConfig cfg;

  require("scenario.shape");
  {
    const auto& [value, ln] = raw.entries.at("scenario.shape");
    if (value == "circle") {
      cfg.shape = CurveShape::circle;
    } else if (value == "figure8") {
      cfg.shape = CurveShape::figure8;
    } else {
      fail_line(ln, "scenario.shape must be 'circle' or 'figure8'");
    }
  }

  if (cfg.shape == CurveShape::circle) {
    require("scenario.radius");
    cfg.geometry.radius = parse_double(raw, "scenario.radius");
    cfg.geometry.revolutions =
        raw.has("scenario.revolutions") ? parse_double(raw, "scenario.revolutions") : 1.0;
    for (const char* k : {"scenario.amplitude_x", "scenario.amplitude_y"}) {
      if (raw.has(k)) fail_line(raw.entries.at(k).second, std::string(k) + " is not a circle key");
    }
    if (!(cfg.geometry.radius > 0.0) || !(cfg.geometry.revolutions > 0.0)) {
      throw ConfigError("config: circle radius and revolutions must be positive");
    }
  } else {
    require("scenario.amplitude_x");
    require("scenario.amplitude_y");
    cfg.geometry.a = parse_double(raw, "scenario.amplitude_x");
    cfg.geometry.b = parse_double(raw, "scenario.amplitude_y");
    for (const char* k : {"scenario.radius", "scenario.revolutions"}) {
      if (raw.has(k)) fail_line(raw.entries.at(k).second, std::string(k) + " is not a figure8 key");
    }
    if (!(cfg.geometry.a > 0.0) || !(cfg.geometry.b > 0.0)) {
      throw ConfigError("config: figure8 amplitudes must be positive");
    }
  }

  require("scenario.period");
  require("scenario.points");
  require("robot.wheelbase");
  require("mpc.horizon");
  require("mpc.state_weight");
  require("mpc.input_weight");
  require("bounds.state_min");
  require("bounds.state_max");
  require("bounds.input_min");
  require("bounds.input_max");
  require("run.initial_state");
  require("sampling.samples_per_point");

  cfg.period = parse_double(raw, "scenario.period");
  cfg.points = static_cast<int>(parse_int(raw, "scenario.points"));
  cfg.robot.wheelbase = parse_double(raw, "robot.wheelbase");
  cfg.horizon = static_cast<int>(parse_int(raw, "mpc.horizon"));
  cfg.state_weight = parse_vec<Vec3>(raw, "mpc.state_weight", 3);
  cfg.input_weight = parse_vec<Vec2>(raw, "mpc.input_weight", 2);
  cfg.x_min = parse_vec<Vec3>(raw, "bounds.state_min", 3);
  cfg.x_max = parse_vec<Vec3>(raw, "bounds.state_max", 3);
  cfg.u_min = parse_vec<Vec2>(raw, "bounds.input_min", 2);
  cfg.u_max = parse_vec<Vec2>(raw, "bounds.input_max", 2);
  {
    const Vec3 s = parse_vec<Vec3>(raw, "run.initial_state", 3);
    cfg.initial_state = State::from_vec(s);
  }
  cfg.plan.samples_per_point = static_cast<int>(parse_int(raw, "sampling.samples_per_point"));
  if (raw.has("sampling.radius")) cfg.plan.radius = parse_double(raw, "sampling.radius");
  if (raw.has("sampling.resample_tolerance")) {
    cfg.plan.resample_tolerance = parse_double(raw, "sampling.resample_tolerance");
  }
  if (raw.has("sampling.resample_budget")) {
    cfg.plan.resample_budget = static_cast<int>(parse_int(raw, "sampling.resample_budget"));
  }
  if (raw.has("sampling.validation_grid")) {
    cfg.plan.validation_grid_size = static_cast<int>(parse_int(raw, "sampling.validation_grid"));
  }
  if (raw.has("linearization.delta_threshold")) {
    cfg.delta_threshold = parse_double(raw, "linearization.delta_threshold");
  }
  if (raw.has("rng.seed")) {
    cfg.seed = parse_u64(raw, "rng.seed");
    cfg.seed_defaulted = false;
  }

  // Range checks.
  if (!(cfg.period > 0.0)) throw ConfigError("config: scenario.period must be positive");
  if (cfg.points < 2) throw ConfigError("config: scenario.points must be >= 2");
  if (!(cfg.robot.wheelbase > 0.0)) throw ConfigError("config: robot.wheelbase must be positive");
  if (cfg.horizon < 1) throw ConfigError("config: mpc.horizon must be >= 1");
  if ((cfg.state_weight.array() < 0.0).any()) {
    throw ConfigError("config: mpc.state_weight entries must be >= 0");
  }
  if ((cfg.input_weight.array() <= 0.0).any()) {
    throw ConfigError("config: mpc.input_weight entries must be > 0");
  }
  if (((cfg.x_max - cfg.x_min).array() <= 0.0).any() ||
      ((cfg.u_max - cfg.u_min).array() <= 0.0).any()) {
    throw ConfigError("config: box bounds must satisfy min < max");
  }
  if (cfg.u_min(1) < -kHalfPi || cfg.u_max(1) > kHalfPi) {
    throw ConfigError("config: steering bounds must stay within [-pi/2, pi/2]");
  }
  if (cfg.plan.samples_per_point < 1) {
    throw ConfigError("config: sampling.samples_per_point must be >= 1");
  }
  if (cfg.plan.radius < 0.0) throw ConfigError("config: sampling.radius must be >= 0");
  if (!(cfg.plan.resample_tolerance > 0.0)) {
    throw ConfigError("config: sampling.resample_tolerance must be positive");
  }
  if (cfg.plan.resample_budget < 0) {
    throw ConfigError("config: sampling.resample_budget must be >= 0");
  }
  if (cfg.plan.validation_grid_size < 1) {
    throw ConfigError("config: sampling.validation_grid must be >= 1");
  }
  if (cfg.delta_threshold < 0.0) {
    throw ConfigError("config: linearization.delta_threshold must be >= 0");
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  return parse_config(is);
}

void write_config(std::ostream& os, const ScenarioConfig& cfg) {
  os << "scenario.shape = " << (cfg.shape == CurveShape::circle ? "circle" : "figure8") << "\n";
  if (cfg.shape == CurveShape::circle) {
    os << "scenario.radius = " << fmt(cfg.geometry.radius) << "\n";
    os << "scenario.revolutions = " << fmt(cfg.geometry.revolutions) << "\n";
  } else {
    os << "scenario.amplitude_x = " << fmt(cfg.geometry.a) << "\n";
    os << "scenario.amplitude_y = " << fmt(cfg.geometry.b) << "\n";
  }
  os << "scenario.period = " << fmt(cfg.period) << "\n";
  os << "scenario.points = " << cfg.points << "\n";
  os << "robot.wheelbase = " << fmt(cfg.robot.wheelbase) << "\n";
  os << "mpc.horizon = " << cfg.horizon << "\n";
  os << "mpc.state_weight = " << fmt(cfg.state_weight(0)) << ' ' << fmt(cfg.state_weight(1))
     << ' ' << fmt(cfg.state_weight(2)) << "\n";
  os << "mpc.input_weight = " << fmt(cfg.input_weight(0)) << ' ' << fmt(cfg.input_weight(1))
     << "\n";
  os << "bounds.state_min = " << fmt(cfg.x_min(0)) << ' ' << fmt(cfg.x_min(1)) << ' '
     << fmt(cfg.x_min(2)) << "\n";
  os << "bounds.state_max = " << fmt(cfg.x_max(0)) << ' ' << fmt(cfg.x_max(1)) << ' '
     << fmt(cfg.x_max(2)) << "\n";
  os << "bounds.input_min = " << fmt(cfg.u_min(0)) << ' ' << fmt(cfg.u_min(1)) << "\n";
  os << "bounds.input_max = " << fmt(cfg.u_max(0)) << ' ' << fmt(cfg.u_max(1)) << "\n";
  os << "run.initial_state = " << fmt(cfg.initial_state.x) << ' ' << fmt(cfg.initial_state.y)
     << ' ' << fmt(cfg.initial_state.phi) << "\n";
  os << "sampling.samples_per_point = " << cfg.plan.samples_per_point << "\n";
  os << "sampling.radius = " << fmt(cfg.plan.radius) << "\n";
  os << "sampling.resample_tolerance = " << fmt(cfg.plan.resample_tolerance) << "\n";
  os << "sampling.resample_budget = " << cfg.plan.resample_budget << "\n";
  os << "sampling.validation_grid = " << cfg.plan.validation_grid_size << "\n";
  os << "linearization.delta_threshold = " << fmt(cfg.delta_threshold) << "\n";
  os << "rng.seed = " << cfg.seed << "\n";
}

TrackingSetup to_setup(const ScenarioConfig& cfg) {
  TrackingSetup s;
  s.robot = cfg.robot;
  s.horizon = cfg.horizon;
  s.Q = cfg.state_weight.asDiagonal();
  s.R = cfg.input_weight.asDiagonal();
  s.x_min = cfg.x_min;
  s.x_max = cfg.x_max;
  s.u_min = cfg.u_min;
  s.u_max = cfg.u_max;
  s.delta_threshold = cfg.delta_threshold;
  return s;
}

ReferenceTrajectory make_trajectory(const ScenarioConfig& cfg) {
  return generate_reference(cfg.shape, cfg.geometry, cfg.robot, cfg.period, cfg.points);
}

}  // namespace latmpc
