#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "latmpc/controller.hpp"
#include "latmpc/errors.hpp"

using namespace latmpc;

namespace {

constexpr double kPi = 3.141592653589793;

// Circle arcs with one point every 0.0654 rad keep the reference speed at
// 1.308 m/s regardless of the point count, so small and tiny instances share
// per-point geometry.
ReferenceTrajectory arc(int count, double revolutions) {
  CurveGeometry geom;
  geom.radius = 2.0;
  geom.revolutions = revolutions;
  return generate_reference(CurveShape::circle, geom, RobotParams{}, 0.1, count);
}

TrackingSetup wide_setup() {
  TrackingSetup s;
  s.horizon = 10;
  s.Q = Vec3(10.0, 10.0, 0.5).asDiagonal();
  s.R = Vec2(0.1, 0.1).asDiagonal();
  s.x_min = Vec3(-5.0, -5.0, -4.0 * kPi);
  s.x_max = Vec3(5.0, 5.0, 4.0 * kPi);
  s.u_min = Vec2(-4.0, -kPi / 2);
  s.u_max = Vec2(4.0, kPi / 2);
  return s;
}

// Same scenario with the speed bound cutting into the sampled neighborhoods,
// so the per-point laws have several affine pieces.
TrackingSetup bounded_setup() {
  TrackingSetup s = wide_setup();
  s.u_min(0) = -1.45;
  s.u_max(0) = 1.45;
  return s;
}

Vec3 draw_ball(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  while (true) {
    const Vec3 d(u(rng), u(rng), u(rng));
    if (d.norm() <= radius) return d;
  }
}

bool lattices_equal(const LatticePWA& a, const LatticePWA& b) {
  if (a.input_dim != b.input_dim || a.literal_count() != b.literal_count() ||
      a.terms != b.terms) {
    return false;
  }
  for (int i = 0; i < a.literal_count(); ++i) {
    if (a.literals[i].a != b.literals[i].a || a.literals[i].c != b.literals[i].c) return false;
  }
  return true;
}

// Full identity including the recorded training draws: in a neighborhood where
// no constraint ever activates, the laws are sample-independent, so the seed is
// only visible in the training set.
bool controllers_equal(const LatticeController& a, const LatticeController& b) {
  if (a.size() != b.size() || a.radius != b.radius || a.trajectory_digest != b.trajectory_digest) {
    return false;
  }
  for (int i = 0; i < a.size(); ++i) {
    for (int c = 0; c < 2; ++c) {
      if (!lattices_equal(a.laws[i][c], b.laws[i][c])) return false;
    }
    if (a.training[i].size() != b.training[i].size()) return false;
    for (size_t k = 0; k < a.training[i].size(); ++k) {
      if (a.training[i][k].state != b.training[i][k].state ||
          a.training[i][k].control != b.training[i][k].control) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("default sampling radius is half the closest adjacent state distance") {
  // Full-scale circle: chord of 1 degree plus the matching heading increment.
  const ReferenceTrajectory traj = arc(360, 1.0);
  const double expected = 0.5 * std::hypot(4.0 * std::sin(kPi / 360.0), 2.0 * kPi / 360.0);
  const double r = default_sampling_radius(traj);
  CHECK(r == doctest::Approx(expected).epsilon(1e-12));
  CHECK(r == doctest::Approx(0.01951317611677173).epsilon(1e-12));

  ReferenceTrajectory tiny;
  tiny.period = 0.1;
  tiny.points.resize(1);
  CHECK_THROWS_AS(default_sampling_radius(tiny), std::invalid_argument);
  tiny.points.resize(2);
  tiny.points[1] = tiny.points[0];
  CHECK_THROWS_AS(default_sampling_radius(tiny), std::invalid_argument);
}

TEST_CASE("trajectory digest is stable and sensitive") {
  const ReferenceTrajectory traj = arc(12, 0.125);
  ReferenceTrajectory copy = traj;
  CHECK(trajectory_digest(traj) == trajectory_digest(copy));
  copy.points[3].state.x += 1e-9;
  CHECK(trajectory_digest(traj) != trajectory_digest(copy));
}

TEST_CASE("one condensed QP is built per reference point") {
  const ReferenceTrajectory traj = arc(12, 0.125);
  const TrackingSetup setup = wide_setup();
  const std::vector<MpQpProblem> problems = build_problems(traj, setup);
  REQUIRE(static_cast<int>(problems.size()) == traj.size());
  for (const auto& qp : problems) {
    CHECK(qp.horizon == setup.horizon);
    CHECK(qp.n_constraints() == 94);
  }

  TrackingSetup bad = setup;
  bad.horizon = 0;
  CHECK_THROWS_AS(build_problems(traj, bad), BuildError);
  CHECK_THROWS_AS(build_problems(ReferenceTrajectory{}, setup), BuildError);
}

TEST_CASE("offline build is a deterministic function of the seed") {
  const ReferenceTrajectory traj = arc(12, 0.125);
  const TrackingSetup setup = wide_setup();
  SamplingPlan plan;
  plan.samples_per_point = 20;
  plan.validation_grid_size = 30;

  const LatticeController a = offline_build(traj, setup, plan, 42);
  const LatticeController b = offline_build(traj, setup, plan, 42);
  const LatticeController c = offline_build(traj, setup, plan, 43);
  CHECK(controllers_equal(a, b));
  CHECK(!controllers_equal(a, c));
  REQUIRE(!a.training.empty());
  REQUIRE(!a.training[0].empty());
  CHECK(a.training[0][0].state == b.training[0][0].state);
  CHECK(a.training[0][0].state != c.training[0][0].state);

  SamplingPlan bad = plan;
  bad.samples_per_point = 0;
  CHECK_THROWS_AS(offline_build(traj, setup, bad, 42), BuildError);
  const std::vector<MpQpProblem> wrong_count;
  CHECK_THROWS_AS(offline_build(traj, setup, wrong_count, plan, 42), BuildError);
}

TEST_CASE("an unconstrained neighborhood collapses to one affine piece per input") {
  const ReferenceTrajectory traj = arc(24, 0.25);
  const TrackingSetup setup = wide_setup();
  SamplingPlan plan;
  plan.samples_per_point = 60;
  plan.resample_budget = 8;
  plan.validation_grid_size = 250;

  const LatticeController ctrl = offline_build(traj, setup, plan, 7);
  const std::vector<MpQpProblem> problems = build_problems(traj, setup);

  for (int i = 0; i < ctrl.size(); ++i) {
    const PointBuildStats& st = ctrl.stats[static_cast<size_t>(i)];
    CHECK(st.unresolved == 0);
    CHECK(st.resample_rounds == 0);
    CHECK(st.samples == 60);
    CHECK(st.terms_after == 2);     // one term per input component
    CHECK(st.literals_after == 2);  // one shared gain row per input component

    // Training states must be reproduced essentially exactly.
    for (const TrainingSample& t : ctrl.training[static_cast<size_t>(i)]) {
      for (int c = 0; c < 2; ++c) {
        CHECK(std::abs(evaluate(ctrl.laws[static_cast<size_t>(i)][static_cast<size_t>(c)],
                                t.state) -
                       t.control(c)) <= 1e-8);
      }
    }
  }

  // Held-out states: fresh draws the build never saw.
  std::mt19937_64 rng(999);
  double worst = 0.0;
  for (int i = 0; i < ctrl.size(); ++i) {
    const Vec3 center = traj.points[static_cast<size_t>(i)].state.vec();
    for (int k = 0; k < 20; ++k) {
      const Vec3 x = center + draw_ball(rng, ctrl.radius);
      const QpSolution sol = solve_qp(problems[static_cast<size_t>(i)], x);
      REQUIRE(sol.status == QpStatus::optimal);
      for (int c = 0; c < 2; ++c) {
        worst = std::max(worst,
                         std::abs(evaluate(ctrl.laws[static_cast<size_t>(i)]
                                                    [static_cast<size_t>(c)],
                                           x) -
                                  sol.U(c)));
      }
    }
  }
  CHECK(worst <= plan.resample_tolerance);
}

TEST_CASE("a saturating speed bound produces multi-piece laws that still validate") {
  const ReferenceTrajectory traj = arc(24, 0.25);
  const TrackingSetup setup = bounded_setup();
  SamplingPlan plan;
  plan.samples_per_point = 60;
  plan.resample_budget = 8;
  plan.validation_grid_size = 250;

  const LatticeController ctrl = offline_build(traj, setup, plan, 11);
  const std::vector<MpQpProblem> problems = build_problems(traj, setup);

  int total_before = 0, total_after = 0, multi_piece_points = 0;
  for (int i = 0; i < ctrl.size(); ++i) {
    const PointBuildStats& st = ctrl.stats[static_cast<size_t>(i)];
    CHECK(st.unresolved == 0);
    total_before += st.terms_before;
    total_after += st.terms_after;
    if (st.literals_after > 2) ++multi_piece_points;

    for (const TrainingSample& t : ctrl.training[static_cast<size_t>(i)]) {
      for (int c = 0; c < 2; ++c) {
        CHECK(std::abs(evaluate(ctrl.laws[static_cast<size_t>(i)][static_cast<size_t>(c)],
                                t.state) -
                       t.control(c)) <= 1e-8);
      }
    }
  }
  CHECK(multi_piece_points > 0);      // the bound actually bites somewhere
  CHECK(total_after < total_before);  // simplification earned its keep

  std::mt19937_64 rng(1000);
  double worst = 0.0;
  for (int i = 0; i < ctrl.size(); ++i) {
    const Vec3 center = traj.points[static_cast<size_t>(i)].state.vec();
    for (int k = 0; k < 20; ++k) {
      const Vec3 x = center + draw_ball(rng, ctrl.radius);
      const QpSolution sol = solve_qp(problems[static_cast<size_t>(i)], x);
      REQUIRE(sol.status == QpStatus::optimal);
      for (int c = 0; c < 2; ++c) {
        worst = std::max(worst,
                         std::abs(evaluate(ctrl.laws[static_cast<size_t>(i)]
                                                    [static_cast<size_t>(c)],
                                           x) -
                                  sol.U(c)));
      }
    }
  }
  CHECK(worst <= plan.resample_tolerance);
}

TEST_CASE("online evaluation clamps into the input box and rejects bad indices") {
  const ReferenceTrajectory traj = arc(12, 0.125);
  const TrackingSetup setup = wide_setup();
  SamplingPlan plan;
  plan.samples_per_point = 15;
  plan.validation_grid_size = 20;
  const LatticeController ctrl = offline_build(traj, setup, plan, 4);

  // Far outside the ball the affine laws extrapolate to huge values.
  State far;
  far.x = 80.0;
  far.y = -90.0;
  far.phi = 0.0;
  const Control u = online_step(ctrl, 0, far);
  const bool at_speed_edge = u.v == ctrl.u_min(0) || u.v == ctrl.u_max(0);
  const bool at_steer_edge = u.steer == ctrl.u_min(1) || u.steer == ctrl.u_max(1);
  CHECK((at_speed_edge || at_steer_edge));

  const Control near = online_step(ctrl, 3, traj.points[3].state);
  CHECK(near.v <= ctrl.u_max(0));
  CHECK(near.v >= ctrl.u_min(0));
  CHECK(std::abs(near.v - traj.points[3].control.v) <= 0.05);

  CHECK_THROWS_AS(online_step(ctrl, -1, far), std::out_of_range);
  CHECK_THROWS_AS(online_step(ctrl, ctrl.size(), far), std::out_of_range);
}

TEST_CASE("all three strategies track a smooth arc from the reference start") {
  const ReferenceTrajectory traj = arc(24, 0.25);
  const TrackingSetup setup = wide_setup();
  SamplingPlan plan;
  plan.samples_per_point = 40;
  plan.validation_grid_size = 80;

  ScenarioArtifacts art = prepare_scenario(traj, setup);
  ensure_controller(art, setup, plan, 2024);
  ensure_regions(art, plan, 2024);
  REQUIRE(art.controller.has_value());
  REQUIRE(art.regions.has_value());
  ensure_controller(art, setup, plan, 2024);  // idempotent
  ensure_regions(art, plan, 2024);

  const State x0 = traj.points[0].state;
  const TrackingResult lat = run_tracking(Strategy::lattice, art, setup, x0);
  const TrackingResult mpc = run_tracking(Strategy::linear_mpc, art, setup, x0);
  const TrackingResult seq = run_tracking(Strategy::explicit_seq, art, setup, x0);

  for (const TrackingResult* r : {&lat, &mpc, &seq}) {
    CHECK(static_cast<int>(r->states.size()) == traj.size());
    CHECK(static_cast<int>(r->controls.size()) == traj.size());
    CHECK(static_cast<int>(r->position_error.size()) == traj.size());
    CHECK(static_cast<int>(r->eval_time_ns.size()) == traj.size());
    CHECK(r->average_error > 0.0);
    CHECK(r->average_error < 0.02);
    CHECK(r->constraint_violations == 0);
    for (const std::int64_t t : r->eval_time_ns) CHECK(t >= 0);
  }
  CHECK(lat.strategy == Strategy::lattice);
  CHECK(seq.fallback_count == 0);

  // With no active constraints anywhere, the lattice law IS the QP law, so the
  // closed-loop runs coincide to rounding.
  for (int k = 0; k < traj.size(); ++k) {
    CHECK(std::abs(lat.controls[static_cast<size_t>(k)].v -
                   mpc.controls[static_cast<size_t>(k)].v) <= 1e-9);
    CHECK(std::abs(lat.controls[static_cast<size_t>(k)].steer -
                   mpc.controls[static_cast<size_t>(k)].steer) <= 1e-9);
    CHECK((lat.states[static_cast<size_t>(k)].vec() - seq.states[static_cast<size_t>(k)].vec())
              .lpNorm<Eigen::Infinity>() <= 1e-9);
  }
}

TEST_CASE("tracking refuses to run with incomplete artifacts") {
  const ReferenceTrajectory traj = arc(12, 0.125);
  const TrackingSetup setup = wide_setup();
  ScenarioArtifacts art = prepare_scenario(traj, setup);
  const State x0 = traj.points[0].state;

  CHECK_THROWS_AS(run_tracking(Strategy::lattice, art, setup, x0), RunError);
  CHECK_THROWS_AS(run_tracking(Strategy::explicit_seq, art, setup, x0), RunError);
  ScenarioArtifacts empty;
  CHECK_THROWS_AS(run_tracking(Strategy::linear_mpc, empty, setup, x0), RunError);

  CHECK(strategy_name(Strategy::lattice) == "lattice");
  CHECK(strategy_name(Strategy::linear_mpc) == "linear_mpc");
  CHECK(strategy_name(Strategy::explicit_seq) == "explicit_seq");
  CHECK(strategy_from_name("lattice") == Strategy::lattice);
  CHECK(strategy_from_name("linear_mpc") == Strategy::linear_mpc);
  CHECK(strategy_from_name("explicit_seq") == Strategy::explicit_seq);
  CHECK(!strategy_from_name("gain_schedule").has_value());
}

TEST_CASE("the one-step prediction lattice reproduces every linearization exactly") {
  const ReferenceTrajectory traj = arc(24, 0.25);
  const RobotParams p;
  const std::array<LatticePWA, 3> sys = build_system_lattice(traj, p, 0.0);

  CHECK(sys[0].input_dim == 5);
  CHECK(sys[1].input_dim == 5);
  CHECK(sys[2].input_dim == 5);
  CHECK(sys[0].literal_count() == traj.size());
  CHECK(sys[1].literal_count() == traj.size());
  // The heading row of the model is identical at every point of a circle.
  CHECK(sys[2].literal_count() == 1);

  for (int i = 0; i < traj.size(); ++i) {
    const ReferencePoint& pt = traj.points[static_cast<size_t>(i)];
    VecX z(5);
    z << pt.state.vec(), pt.control.vec();
    const Vec3 expected =
        pt.state.vec() + traj.period * dynamics(pt.state, pt.control, p);
    for (int c = 0; c < 3; ++c) {
      CHECK(std::abs(evaluate(sys[static_cast<size_t>(c)], z) - expected(c)) <= 1e-9);
    }
  }

  // A huge sharing threshold collapses everything onto the first model.
  const std::array<LatticePWA, 3> shared = build_system_lattice(traj, p, 1e9);
  CHECK(shared[0].literal_count() == 1);
  CHECK(shared[1].literal_count() == 1);
  CHECK(shared[2].literal_count() == 1);
}

TEST_CASE("controllers persist to a directory and load back bit-identically") {
  namespace fs = std::filesystem;
  const ReferenceTrajectory traj = arc(12, 0.125);
  const TrackingSetup setup = bounded_setup();
  SamplingPlan plan;
  plan.samples_per_point = 25;
  plan.validation_grid_size = 40;
  const LatticeController ctrl = offline_build(traj, setup, plan, 17);

  const fs::path dir = fs::temp_directory_path() / "latmpc_ctrl_roundtrip";
  fs::remove_all(dir);
  save_controller(ctrl, dir.string());
  const LatticeController back = load_controller(dir.string(), traj);

  CHECK(back.radius == ctrl.radius);
  CHECK(back.u_min == ctrl.u_min);
  CHECK(back.u_max == ctrl.u_max);
  CHECK(back.trajectory_digest == ctrl.trajectory_digest);
  REQUIRE(back.size() == ctrl.size());
  for (int i = 0; i < ctrl.size(); ++i) {
    for (int c = 0; c < 2; ++c) {
      CHECK(lattices_equal(back.laws[static_cast<size_t>(i)][static_cast<size_t>(c)],
                           ctrl.laws[static_cast<size_t>(i)][static_cast<size_t>(c)]));
    }
  }

  // Loading against a different trajectory must be refused.
  const ReferenceTrajectory other = arc(12, 0.2);
  CHECK_THROWS_AS(load_controller(dir.string(), other), BuildError);

  // A corrupt manifest must be refused.
  {
    std::ofstream m(dir / "manifest.txt");
    m << "not a manifest\n";
  }
  CHECK_THROWS_AS(load_controller(dir.string(), traj), BuildError);

  const fs::path missing = fs::temp_directory_path() / "latmpc_ctrl_nonexistent";
  fs::remove_all(missing);
  CHECK_THROWS_AS(load_controller(missing.string(), traj), BuildError);

  fs::remove_all(dir);
}
