#include "latmpc/controller.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "latmpc/errors.hpp"

namespace latmpc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t point_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(stream * 0x9E3779B97F4A7C15ull + index + 1));
}

// Uniform draw from the closed Euclidean ball of the given radius (rejection
// sampling from the bounding cube).
Vec3 draw_in_ball(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  while (true) {
    const Vec3 p(unit(rng), unit(rng), unit(rng));
    if (p.squaredNorm() <= 1.0) return radius * p;
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct PointBuild {
  std::array<LatticePWA, 2> laws;
  PointBuildStats stats;
  std::vector<TrainingSample> training;
};

// Sample the QP around one reference state and compress the optimal first
// input into one max-min lattice per input component.
PointBuild build_point(const MpQpProblem& qp, const Vec3& center, double radius,
                       const SamplingPlan& plan, std::mt19937_64& rng, int point_index,
                       bool simplify_laws) {
  PointBuild out;
  std::array<std::vector<LabeledSample>, 2> samples;
  std::vector<VecX> validation;  // accumulated validation points for simplify

  const int max_attempts = 50 * std::max(plan.samples_per_point, 1) + 100;
  int attempts = 0;

  auto draw_feasible = [&](Vec3& x, QpSolution& sol) {
    while (true) {
      if (++attempts > max_attempts) {
        std::ostringstream os;
        os << "reference point " << point_index
           << ": could not draw feasible states in the sampling ball (attempts="
           << attempts - 1 << ", discarded=" << out.stats.discarded << ")";
        throw BuildError(os.str());
      }
      x = center + draw_in_ball(rng, radius);
      sol = solve_qp(qp, x);
      if (sol.status == QpStatus::optimal) return;
      ++out.stats.discarded;
    }
  };

  auto add_sample = [&](const Vec3& x, const QpSolution& sol) {
    const ExplicitLaw law = explicit_law(qp, sol, x);
    const AffineControlLaw fc = first_control(qp, law);
    for (int c = 0; c < 2; ++c) {
      AffineFunction piece;
      piece.a = fc.gain.row(c).transpose();
      piece.c = fc.offset(c);
      LabeledSample s;
      s.point = x;
      s.value = piece(x);
      s.active = std::move(piece);
      samples[c].push_back(std::move(s));
    }
    out.training.push_back({x, sol.U.head(2)});
  };

  for (int i = 0; i < plan.samples_per_point; ++i) {
    Vec3 x;
    QpSolution sol;
    draw_feasible(x, sol);
    add_sample(x, sol);
  }

  auto rebuild = [&] {
    for (int c = 0; c < 2; ++c) out.laws[c] = construct_from_samples(samples[c]);
  };
  rebuild();

  // Validate on fresh draws; mismatching states are added as samples together
  // with their own affine laws, then the lattices are rebuilt.
  auto validate_round = [&](bool add_mismatches) {
    int mismatches = 0;
    for (int i = 0; i < plan.validation_grid_size; ++i) {
      Vec3 x;
      QpSolution sol;
      draw_feasible(x, sol);
      validation.push_back(x);
      double err = 0.0;
      for (int c = 0; c < 2; ++c) {
        err = std::max(err, std::abs(evaluate(out.laws[c], x) - sol.U(c)));
      }
      if (err > plan.resample_tolerance) {
        ++mismatches;
        if (add_mismatches) add_sample(x, sol);
      }
    }
    return mismatches;
  };

  int last_mismatches = 0;
  for (int round = 0; round < plan.resample_budget; ++round) {
    last_mismatches = validate_round(true);
    if (last_mismatches == 0) break;
    ++out.stats.resample_rounds;
    rebuild();
  }
  // Budget exhausted while still adding samples: probe once more so the
  // reported state is honest about remaining disagreement.
  if (last_mismatches > 0) {
    out.stats.unresolved = validate_round(false);
  }

  out.stats.samples = static_cast<int>(samples[0].size());
  out.stats.terms_before = out.laws[0].term_count() + out.laws[1].term_count();
  out.stats.literals_before = out.laws[0].literal_count() + out.laws[1].literal_count();

  if (simplify_laws) {
    for (const auto& t : out.training) validation.push_back(t.state);
    for (int c = 0; c < 2; ++c) out.laws[c] = simplify(out.laws[c], validation);
  }
  out.stats.terms_after = out.laws[0].term_count() + out.laws[1].term_count();
  out.stats.literals_after = out.laws[0].literal_count() + out.laws[1].literal_count();
  return out;
}

void clamp_control(Control& u, const Vec2& lo, const Vec2& hi) {
  u.v = std::clamp(u.v, lo(0), hi(0));
  u.steer = std::clamp(u.steer, lo(1), hi(1));
}

}  // namespace

double default_sampling_radius(const ReferenceTrajectory& traj) {
  if (traj.size() < 2) throw std::invalid_argument("trajectory needs at least 2 points");
  double dmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < traj.size(); ++i) {
    dmin = std::min(dmin, (traj.points[i + 1].state.vec() - traj.points[i].state.vec()).norm());
  }
  if (!(dmin > 0.0)) {
    throw std::invalid_argument("adjacent reference states coincide; no usable ball radius");
  }
  return 0.5 * dmin;
}

std::uint64_t trajectory_digest(const ReferenceTrajectory& traj) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const std::string& s) {
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
  };
  mix(fmt(traj.period));
  for (const auto& pt : traj.points) {
    mix(fmt(pt.state.x));
    mix(fmt(pt.state.y));
    mix(fmt(pt.state.phi));
    mix(fmt(pt.control.v));
    mix(fmt(pt.control.steer));
    mix(fmt(pt.xdot(0)));
    mix(fmt(pt.xdot(1)));
    mix(fmt(pt.xdot(2)));
  }
  return h;
}

std::vector<MpQpProblem> build_problems(const ReferenceTrajectory& traj,
                                        const TrackingSetup& setup) {
  if (traj.size() < 1) throw BuildError("build_problems: empty trajectory");
  if (setup.horizon < 1) throw BuildError("build_problems: horizon must be >= 1");

  const std::vector<int> assign =
      select_linearization_points(traj, setup.robot, setup.delta_threshold);

  std::map<int, DiscreteAffineModel> models;
  for (int src : assign) {
    if (!models.count(src)) {
      models.emplace(src, linearize(traj.points[src].state, traj.points[src].control,
                                    setup.robot, traj.period, src));
    }
  }

  std::vector<MpQpProblem> problems;
  problems.reserve(traj.size());
  for (int i = 0; i < traj.size(); ++i) {
    LinearMpcSpec spec;
    spec.model = models.at(assign[i]);
    spec.horizon = setup.horizon;
    spec.Q = setup.Q;
    spec.R = setup.R;
    spec.x_min = setup.x_min;
    spec.x_max = setup.x_max;
    spec.u_min = setup.u_min;
    spec.u_max = setup.u_max;
    spec.reference.reserve(setup.horizon);
    for (int k = 0; k < setup.horizon; ++k) {
      const int j = std::min(i + k, traj.size() - 1);  // hold the final point
      spec.reference.emplace_back(traj.points[j].state.vec(), traj.points[j].control.vec());
    }
    problems.push_back(condense(spec));
  }
  return problems;
}

LatticeController offline_build(const ReferenceTrajectory& traj, const TrackingSetup& setup,
                                const SamplingPlan& plan, std::uint64_t seed,
                                bool simplify_laws) {
  return offline_build(traj, setup, build_problems(traj, setup), plan, seed, simplify_laws);
}

LatticeController offline_build(const ReferenceTrajectory& traj, const TrackingSetup& setup,
                                const std::vector<MpQpProblem>& problems,
                                const SamplingPlan& plan, std::uint64_t seed,
                                bool simplify_laws) {
  if (static_cast<int>(problems.size()) != traj.size()) {
    throw BuildError("offline_build: one QP per trajectory point expected");
  }
  if (plan.samples_per_point < 1 || plan.validation_grid_size < 1 ||
      plan.resample_budget < 0 || plan.radius < 0.0) {
    throw BuildError("offline_build: invalid sampling plan");
  }

  LatticeController ctrl;
  ctrl.radius = plan.radius > 0.0 ? plan.radius : default_sampling_radius(traj);
  ctrl.u_min = setup.u_min;
  ctrl.u_max = setup.u_max;
  ctrl.trajectory_digest = trajectory_digest(traj);
  ctrl.laws.reserve(traj.size());
  ctrl.stats.reserve(traj.size());
  ctrl.training.reserve(traj.size());

  for (int i = 0; i < traj.size(); ++i) {
    std::mt19937_64 rng(point_seed(seed, 1, static_cast<std::uint64_t>(i)));
    PointBuild pb = build_point(problems[i], traj.points[i].state.vec(), ctrl.radius, plan,
                                rng, i, simplify_laws);
    ctrl.laws.push_back(std::move(pb.laws));
    ctrl.stats.push_back(pb.stats);
    ctrl.training.push_back(std::move(pb.training));
  }
  return ctrl;
}

Control online_step(const LatticeController& ctrl, int index, const State& s) {
  if (index < 0 || index >= ctrl.size()) {
    throw std::out_of_range("online_step: reference index out of range");
  }
  const Vec3 x = s.vec();
  Control u;
  u.v = evaluate(ctrl.laws[index][0], x);
  u.steer = evaluate(ctrl.laws[index][1], x);
  clamp_control(u, ctrl.u_min, ctrl.u_max);
  return u;
}

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::lattice: return "lattice";
    case Strategy::linear_mpc: return "linear_mpc";
    case Strategy::explicit_seq: return "explicit_seq";
  }
  return "unknown";
}

std::optional<Strategy> strategy_from_name(const std::string& name) {
  if (name == "lattice") return Strategy::lattice;
  if (name == "linear_mpc") return Strategy::linear_mpc;
  if (name == "explicit_seq") return Strategy::explicit_seq;
  return std::nullopt;
}

ScenarioArtifacts prepare_scenario(const ReferenceTrajectory& traj,
                                   const TrackingSetup& setup) {
  ScenarioArtifacts art;
  art.traj = traj;
  art.problems = build_problems(traj, setup);
  return art;
}

void ensure_controller(ScenarioArtifacts& art, const TrackingSetup& setup,
                       const SamplingPlan& plan, std::uint64_t seed) {
  if (art.controller) return;
  art.controller = offline_build(art.traj, setup, art.problems, plan, seed, true);
}

void ensure_regions(ScenarioArtifacts& art, const SamplingPlan& plan, std::uint64_t seed) {
  if (art.regions) return;
  const double radius = plan.radius > 0.0 ? plan.radius : default_sampling_radius(art.traj);
  std::vector<std::vector<ExplicitLaw>> regions;
  regions.reserve(art.problems.size());
  for (size_t i = 0; i < art.problems.size(); ++i) {
    std::mt19937_64 rng(point_seed(seed, 2, i));
    const Vec3 center = art.traj.points[static_cast<int>(i)].state.vec();
    std::vector<VecX> seeds;
    const int n_seeds = plan.samples_per_point + plan.validation_grid_size;
    seeds.reserve(n_seeds);
    for (int k = 0; k < n_seeds; ++k) {
      seeds.push_back(VecX(center + draw_in_ball(rng, radius)));
    }
    regions.push_back(enumerate_regions(art.problems[i], seeds));
  }
  art.regions = std::move(regions);
}

TrackingResult run_tracking(Strategy strategy, const ScenarioArtifacts& art,
                            const TrackingSetup& setup, const State& x0) {
  const int count = art.traj.size();
  if (count < 1) throw RunError("run_tracking: empty trajectory");
  if (static_cast<int>(art.problems.size()) != count) {
    throw RunError("run_tracking: scenario artifacts incomplete (QPs missing)");
  }
  if (strategy == Strategy::lattice && !art.controller) {
    throw RunError("run_tracking: lattice controller not built");
  }
  if (strategy == Strategy::explicit_seq && !art.regions) {
    throw RunError("run_tracking: explicit region lists not built");
  }

  TrackingResult res;
  res.strategy = strategy;
  res.states.reserve(count);
  res.controls.reserve(count);
  res.position_error.reserve(count);
  res.eval_time_ns.reserve(count);

  State x = x0;
  std::vector<int> warm;
  for (int k = 0; k < count; ++k) {
    Control u;
    const auto t0 = std::chrono::steady_clock::now();
    switch (strategy) {
      case Strategy::lattice:
        u = online_step(*art.controller, k, x);
        break;
      case Strategy::linear_mpc: {
        const QpSolution sol = solve_qp(art.problems[k], x.vec(), &warm);
        if (sol.status != QpStatus::optimal) {
          std::ostringstream os;
          os << "run_tracking: QP infeasible at step " << k << " (state " << x.x << ", "
             << x.y << ", " << x.phi << ")";
          throw RunError(os.str());
        }
        warm = sol.active_set;
        u = Control::from_vec(sol.U.head(2));
        break;
      }
      case Strategy::explicit_seq: {
        const auto hit = sequential_search((*art.regions)[k], x.vec());
        if (hit) {
          u = Control::from_vec(hit->head(2));
        } else {
          ++res.fallback_count;
          const QpSolution sol = solve_qp(art.problems[k], x.vec());
          if (sol.status != QpStatus::optimal) {
            std::ostringstream os;
            os << "run_tracking: fallback QP infeasible at step " << k;
            throw RunError(os.str());
          }
          u = Control::from_vec(sol.U.head(2));
        }
        break;
      }
    }
    const auto t1 = std::chrono::steady_clock::now();
    clamp_control(u, setup.u_min, setup.u_max);

    res.eval_time_ns.push_back(
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    res.states.push_back(x);
    res.controls.push_back(u);

    const Vec3 xv = x.vec();
    const Vec3 rv = art.traj.points[k].state.vec();
    res.position_error.push_back(std::hypot(xv(0) - rv(0), xv(1) - rv(1)));
    if ((xv.array() > setup.x_max.array() + 1e-9).any() ||
        (xv.array() < setup.x_min.array() - 1e-9).any()) {
      ++res.constraint_violations;
    }

    x = integrate_plant(x, u, setup.robot, art.traj.period);
  }

  double acc = 0.0;
  for (double e : res.position_error) acc += e;
  res.average_error = acc / static_cast<double>(count);
  return res;
}

std::array<LatticePWA, 3> build_system_lattice(const ReferenceTrajectory& traj,
                                               const RobotParams& p,
                                               double delta_threshold) {
  const std::vector<int> assign = select_linearization_points(traj, p, delta_threshold);
  std::map<int, DiscreteAffineModel> models;
  for (int src : assign) {
    if (!models.count(src)) {
      models.emplace(src, linearize(traj.points[src].state, traj.points[src].control, p,
                                    traj.period, src));
    }
  }

  // Joint input (state, control) in R^5; one scalar lattice per state component
  // of the one-step prediction.
  std::array<std::vector<LabeledSample>, 3> samples;
  for (int i = 0; i < traj.size(); ++i) {
    const DiscreteAffineModel& m = models.at(assign[i]);
    VecX zi(5);
    zi << traj.points[i].state.vec(), traj.points[i].control.vec();
    for (int c = 0; c < 3; ++c) {
      AffineFunction piece;
      piece.a.resize(5);
      piece.a << m.A.row(c).transpose(), m.B.row(c).transpose();
      piece.c = m.b(c);
      LabeledSample s;
      s.point = zi;
      s.value = piece(zi);
      s.active = std::move(piece);
      samples[c].push_back(std::move(s));
    }
  }

  std::array<LatticePWA, 3> out;
  for (int c = 0; c < 3; ++c) out[c] = construct_from_samples(samples[c]);
  return out;
}

void save_controller(const LatticeController& ctrl, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RunError("save_controller: cannot create directory " + dir + ": " + ec.message());

  std::ofstream manifest(fs::path(dir) / "manifest.txt");
  if (!manifest) throw RunError("save_controller: cannot open manifest for writing");
  manifest << "controller 1\n";
  manifest << "digest " << ctrl.trajectory_digest << "\n";
  manifest << "points " << ctrl.size() << "\n";
  manifest << "radius " << fmt(ctrl.radius) << "\n";
  manifest << "u_min " << fmt(ctrl.u_min(0)) << ' ' << fmt(ctrl.u_min(1)) << "\n";
  manifest << "u_max " << fmt(ctrl.u_max(0)) << ' ' << fmt(ctrl.u_max(1)) << "\n";
  if (!manifest) throw RunError("save_controller: manifest write failed");

  for (int i = 0; i < ctrl.size(); ++i) {
    for (int c = 0; c < 2; ++c) {
      char name[64];
      std::snprintf(name, sizeof name, "point_%06d_c%d.lat", i, c);
      std::ofstream os(fs::path(dir) / name);
      if (!os) throw RunError(std::string("save_controller: cannot open ") + name);
      write_lattice(os, ctrl.laws[i][c]);
    }
  }
}

LatticeController load_controller(const std::string& dir,
                                  const ReferenceTrajectory& expected_traj) {
  namespace fs = std::filesystem;
  std::ifstream manifest(fs::path(dir) / "manifest.txt");
  if (!manifest) throw BuildError("load_controller: missing manifest in " + dir);

  auto fail = [](const std::string& what) -> void {
    throw BuildError("load_controller: malformed manifest (" + what + ")");
  };

  std::string word;
  int version = 0;
  if (!(manifest >> word >> version) || word != "controller" || version != 1) fail("header");

  LatticeController ctrl;
  int points = 0;
  std::uint64_t digest = 0;
  if (!(manifest >> word >> digest) || word != "digest") fail("digest");
  if (!(manifest >> word >> points) || word != "points" || points < 1) fail("points");
  if (!(manifest >> word >> ctrl.radius) || word != "radius" || !(ctrl.radius > 0.0)) fail("radius");
  if (!(manifest >> word >> ctrl.u_min(0) >> ctrl.u_min(1)) || word != "u_min") fail("u_min");
  if (!(manifest >> word >> ctrl.u_max(0) >> ctrl.u_max(1)) || word != "u_max") fail("u_max");

  const std::uint64_t expected = trajectory_digest(expected_traj);
  if (digest != expected) {
    throw BuildError("load_controller: controller was built for a different trajectory");
  }
  if (points != expected_traj.size()) {
    throw BuildError("load_controller: point count does not match trajectory");
  }

  ctrl.trajectory_digest = digest;
  ctrl.laws.resize(points);
  for (int i = 0; i < points; ++i) {
    for (int c = 0; c < 2; ++c) {
      char name[64];
      std::snprintf(name, sizeof name, "point_%06d_c%d.lat", i, c);
      std::ifstream is(fs::path(dir) / name);
      if (!is) throw BuildError(std::string("load_controller: missing lattice file ") + name);
      ctrl.laws[i][c] = read_lattice(is);
      if (ctrl.laws[i][c].input_dim != 3) {
        throw BuildError(std::string("load_controller: unexpected input dimension in ") + name);
      }
    }
  }
  return ctrl;
}

}  // namespace latmpc
