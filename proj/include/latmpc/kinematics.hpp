#pragma once

#include <vector>

#include "latmpc/types.hpp"

namespace latmpc {

// One sample of a reference trajectory: a state/control pair that satisfies the
// kinematics, plus the state derivative at that pair (kept for model selection
// and reachability checks).
struct ReferencePoint {
  State state;
  Control control;
  Vec3 xdot;
};

struct ReferenceTrajectory {
  double period = 0.0;  // sampling period T in seconds
  std::vector<ReferencePoint> points;

  int size() const { return static_cast<int>(points.size()); }
};

// Discrete affine model  x+ = A x + B u + b  obtained by linearizing the
// continuous kinematics at a reference pair and discretizing with period T.
struct DiscreteAffineModel {
  Mat3 A;
  Mat32 B;
  Vec3 b;
  double period = 0.0;
  int source_index = -1;  // trajectory index the model was linearized at, -1 if free-standing
};

enum class CurveShape { circle, figure8 };

// Geometry of the reference curve; only the fields for the chosen shape are used.
struct CurveGeometry {
  double radius = 2.0;       // circle
  double revolutions = 1.0;  // circle: fraction of full turns covered by the K points
  double a = 2.5;            // figure8: x amplitude of x(s) = a sin s
  double b = 1.5;            // figure8: y amplitude of y(s) = b sin 2s
};

// Continuous-time kinematics xdot = f(state, control) of the bicycle model.
// Throws std::domain_error when |steer| >= pi/2.
Vec3 dynamics(const State& s, const Control& u, const RobotParams& p);

// Jacobians of f with respect to state and control at (s, u).
void dynamics_jacobians(const State& s, const Control& u, const RobotParams& p,
                        Mat3& jx, Mat32& ju);

// First-order discrete model around the reference pair (s_r, u_r):
//   A = I + T df/dx,  B = T df/du,  b = T (f - df/dx s_r - df/du u_r),
// so that A s_r + B u_r + b == s_r + T f(s_r, u_r).
DiscreteAffineModel linearize(const State& s_r, const Control& u_r,
                              const RobotParams& p, double period,
                              int source_index = -1);

// Propagate the true nonlinear kinematics over one period with a zero-order-hold
// control, using fixed-step RK4 with the given number of substeps.
State integrate_plant(const State& s, const Control& u, const RobotParams& p,
                      double period, int substeps = 10);

// Sample a closed reference curve into K kinematically consistent points.
// Speeds, headings (continuously unwrapped) and steering angles are recovered
// from the analytic curve derivatives. Throws std::invalid_argument when the
// curve has zero speed at a sample or the required steering leaves (-pi/2, pi/2).
ReferenceTrajectory generate_reference(CurveShape shape, const CurveGeometry& geom,
                                       const RobotParams& p, double period, int count);

// Greedy assignment of a linearization source point to every trajectory point.
// Walking forward from the current source, the L1 change of the state
// derivative is accumulated; once it reaches delta_threshold the previous point
// becomes the new source. Returns assignment[i] = source point index for point i.
// delta_threshold = 0 assigns every point to itself.
std::vector<int> select_linearization_points(const ReferenceTrajectory& traj,
                                             const RobotParams& p,
                                             double delta_threshold);

}  // namespace latmpc
