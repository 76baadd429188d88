#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "latmpc/controller.hpp"
#include "latmpc/kinematics.hpp"
#include "latmpc/types.hpp"

namespace latmpc {

// Seed used when a config does not set rng.seed; echoed in reports.
inline constexpr std::uint64_t kDefaultSeed = 2024;

// A full scenario description parsed from a flat key-value file.
struct ScenarioConfig {
  CurveShape shape = CurveShape::circle;
  CurveGeometry geometry;
  double period = 0.1;
  int points = 0;

  RobotParams robot;
  int horizon = 10;
  Vec3 state_weight = Vec3::Zero();
  Vec2 input_weight = Vec2::Zero();
  Vec3 x_min = Vec3::Zero(), x_max = Vec3::Zero();
  Vec2 u_min = Vec2::Zero(), u_max = Vec2::Zero();
  State initial_state;

  SamplingPlan plan;
  double delta_threshold = 0.0;

  std::uint64_t seed = kDefaultSeed;
  bool seed_defaulted = true;
};

// Parse and validate. Unknown keys, duplicate keys, malformed values and
// out-of-range settings all raise ConfigError with the offending line.
ScenarioConfig parse_config(std::istream& is);
ScenarioConfig load_config(const std::string& path);

// Canonical serialization; parsing it back yields an equivalent config.
void write_config(std::ostream& os, const ScenarioConfig& cfg);

TrackingSetup to_setup(const ScenarioConfig& cfg);
ReferenceTrajectory make_trajectory(const ScenarioConfig& cfg);

}  // namespace latmpc
