#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latmpc/kinematics.hpp"
#include "latmpc/lattice_pwa.hpp"
#include "latmpc/mpqp.hpp"
#include "latmpc/types.hpp"

namespace latmpc {

// Everything the tracking problem needs besides the trajectory itself.
struct TrackingSetup {
  RobotParams robot;
  int horizon = 10;
  Mat3 Q = Mat3::Identity();
  Mat2 R = Mat2::Identity();
  Vec3 x_min, x_max;
  Vec2 u_min, u_max;
  // Model sharing threshold for the linearization-point selection; 0 gives
  // every reference point its own model.
  double delta_threshold = 0.0;
};

// How the neighborhood of each reference point is sampled offline.
struct SamplingPlan {
  double radius = 0.0;            // 0 -> half the minimum adjacent reference distance
  int samples_per_point = 50;     // initial QP samples per reference point
  double resample_tolerance = 1e-4;
  int resample_budget = 3;        // extra sample/validate rounds
  int validation_grid_size = 100; // fresh validation draws per round
};

// Offline bookkeeping per reference point.
struct PointBuildStats {
  int samples = 0;           // labeled samples used by the final lattice
  int discarded = 0;         // infeasible draws rejected while sampling
  int resample_rounds = 0;   // validation rounds that added samples
  int unresolved = 0;        // validation mismatches left when the budget ran out
  int terms_before = 0;
  int literals_before = 0;
  int terms_after = 0;
  int literals_after = 0;
};

// One recorded offline sample: a state in the ball and the QP-optimal first
// input there (used for training reproduction checks).
struct TrainingSample {
  Vec3 state;
  Vec2 control;
};

// Per-reference-point pair of scalar max-min controllers (one per input
// component), evaluated by trajectory index online.
struct LatticeController {
  double radius = 0.0;
  Vec2 u_min, u_max;
  std::vector<std::array<LatticePWA, 2>> laws;  // laws[i][c], c = 0 speed, 1 steering
  std::vector<PointBuildStats> stats;
  std::vector<std::vector<TrainingSample>> training;  // per point, may be empty after load
  std::uint64_t trajectory_digest = 0;

  int size() const { return static_cast<int>(laws.size()); }
};

// Half the minimum Euclidean distance between adjacent reference states.
double default_sampling_radius(const ReferenceTrajectory& traj);

// Stable digest of a trajectory's numeric content, used to pair persisted
// controllers with the trajectory they were built for.
std::uint64_t trajectory_digest(const ReferenceTrajectory& traj);

// Linearize (with model sharing) and condense one QP per reference point.
// The horizon reference wraps around the trajectory end by repeating the
// final point's pair.
std::vector<MpQpProblem> build_problems(const ReferenceTrajectory& traj,
                                        const TrackingSetup& setup);

// Build the per-point lattice controllers: sample states in a ball around
// each reference state, solve the QP, turn each optimal active set into the
// affine first-input law, assemble max-min lattices, then validate/resample
// and (optionally) simplify against the accumulated validation points.
LatticeController offline_build(const ReferenceTrajectory& traj,
                                const TrackingSetup& setup,
                                const SamplingPlan& plan,
                                std::uint64_t seed,
                                bool simplify_laws = true);

// Same, reusing already condensed QPs (must match the trajectory).
LatticeController offline_build(const ReferenceTrajectory& traj,
                                const TrackingSetup& setup,
                                const std::vector<MpQpProblem>& problems,
                                const SamplingPlan& plan,
                                std::uint64_t seed,
                                bool simplify_laws = true);

// Evaluate the controller for reference point `index` at the measured state
// and clamp the result into the input box.
Control online_step(const LatticeController& ctrl, int index, const State& s);

enum class Strategy { lattice, linear_mpc, explicit_seq };

std::string strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(const std::string& name);

// Closed-loop artifacts shared by all strategies for one scenario.
struct ScenarioArtifacts {
  ReferenceTrajectory traj;
  std::vector<MpQpProblem> problems;
  std::optional<LatticeController> controller;
  std::optional<std::vector<std::vector<ExplicitLaw>>> regions;  // per point
};

ScenarioArtifacts prepare_scenario(const ReferenceTrajectory& traj,
                                   const TrackingSetup& setup);

// Build the lattice controller / the per-point explicit region lists if not
// present yet. Both use the same ball sampling plan and deterministic seeding.
void ensure_controller(ScenarioArtifacts& art, const TrackingSetup& setup,
                       const SamplingPlan& plan, std::uint64_t seed);
void ensure_regions(ScenarioArtifacts& art, const SamplingPlan& plan, std::uint64_t seed);

// One closed-loop tracking run. The plant is the true nonlinear kinematics.
struct TrackingResult {
  Strategy strategy = Strategy::lattice;
  std::vector<State> states;     // length K: visited states, starting at x0
  std::vector<Control> controls; // length K: applied inputs
  std::vector<double> position_error;      // per step, against the indexed reference
  std::vector<std::int64_t> eval_time_ns;  // per-step control evaluation time
  double average_error = 0.0;
  int constraint_violations = 0;  // steps whose measured state left the state box
  int fallback_count = 0;         // explicit_seq steps that needed a QP fallback
};

TrackingResult run_tracking(Strategy strategy, const ScenarioArtifacts& art,
                            const TrackingSetup& setup, const State& x0);

// Max-min approximation of the one-step discrete prediction (state and input
// as joint input, one lattice per state component), built from the per-point
// linearizations. Used to probe the Lipschitz error bound of the
// trajectory-wide model.
std::array<LatticePWA, 3> build_system_lattice(const ReferenceTrajectory& traj,
                                               const RobotParams& p,
                                               double delta_threshold = 0.0);

// Persist / restore a controller as a directory of lattice text files plus a
// manifest carrying the trajectory digest and plan parameters.
void save_controller(const LatticeController& ctrl, const std::string& dir);
LatticeController load_controller(const std::string& dir,
                                  const ReferenceTrajectory& expected_traj);

}  // namespace latmpc
