#include "latmpc/kinematics.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace latmpc {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

void check_params(const RobotParams& p) {
  if (!(p.wheelbase > 0.0)) {
    std::ostringstream os;
    os << "wheelbase must be positive, got " << p.wheelbase;
    throw std::domain_error(os.str());
  }
}

void check_steer(double steer) {
  if (!(std::abs(steer) < kHalfPi)) {
    std::ostringstream os;
    os << "steering angle " << steer << " outside (-pi/2, pi/2)";
    throw std::domain_error(os.str());
  }
}

}  // namespace

Vec3 dynamics(const State& s, const Control& u, const RobotParams& p) {
  check_params(p);
  check_steer(u.steer);
  return Vec3(u.v * std::cos(s.phi),
              u.v * std::sin(s.phi),
              u.v * std::tan(u.steer) / p.wheelbase);
}

void dynamics_jacobians(const State& s, const Control& u, const RobotParams& p,
                        Mat3& jx, Mat32& ju) {
  check_params(p);
  check_steer(u.steer);
  const double c = std::cos(s.phi);
  const double sn = std::sin(s.phi);
  const double sec = 1.0 / std::cos(u.steer);

  jx.setZero();
  jx(0, 2) = -u.v * sn;
  jx(1, 2) = u.v * c;

  ju.setZero();
  ju(0, 0) = c;
  ju(1, 0) = sn;
  ju(2, 0) = std::tan(u.steer) / p.wheelbase;
  ju(2, 1) = u.v * sec * sec / p.wheelbase;
}

DiscreteAffineModel linearize(const State& s_r, const Control& u_r,
                              const RobotParams& p, double period,
                              int source_index) {
  if (!(period > 0.0)) {
    throw std::domain_error("sampling period must be positive");
  }
  Mat3 jx;
  Mat32 ju;
  dynamics_jacobians(s_r, u_r, p, jx, ju);
  const Vec3 f = dynamics(s_r, u_r, p);

  DiscreteAffineModel m;
  m.A = Mat3::Identity() + period * jx;
  m.B = period * ju;
  m.b = period * (f - jx * s_r.vec() - ju * u_r.vec());
  m.period = period;
  m.source_index = source_index;
  return m;
}

State integrate_plant(const State& s, const Control& u, const RobotParams& p,
                      double period, int substeps) {
  if (!(period > 0.0)) {
    throw std::domain_error("sampling period must be positive");
  }
  if (substeps < 1) {
    throw std::invalid_argument("substeps must be >= 1");
  }
  const double h = period / substeps;
  Vec3 x = s.vec();
  for (int i = 0; i < substeps; ++i) {
    auto f = [&](const Vec3& xi) { return dynamics(State::from_vec(xi), u, p); };
    const Vec3 k1 = f(x);
    const Vec3 k2 = f(x + 0.5 * h * k1);
    const Vec3 k3 = f(x + 0.5 * h * k2);
    const Vec3 k4 = f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return State::from_vec(x);
}

ReferenceTrajectory generate_reference(CurveShape shape, const CurveGeometry& geom,
                                       const RobotParams& p, double period, int count) {
  check_params(p);
  if (!(period > 0.0)) {
    throw std::domain_error("sampling period must be positive");
  }
  if (count < 2) {
    throw std::invalid_argument("a reference trajectory needs at least 2 points");
  }

  // Curve position and its first two time derivatives as functions of time.
  std::function<void(double, double&, double&, double&, double&, double&, double&)> curve;
  switch (shape) {
    case CurveShape::circle: {
      if (!(geom.radius > 0.0) || !(geom.revolutions > 0.0)) {
        throw std::invalid_argument("circle needs positive radius and revolutions");
      }
      // One pass of `count` samples covers `revolutions` turns at constant speed.
      const double w = 2.0 * M_PI * geom.revolutions / (count * period);
      const double r = geom.radius;
      curve = [r, w](double t, double& x, double& y, double& dx, double& dy,
                     double& ddx, double& ddy) {
        const double th = w * t;
        x = r * std::cos(th);
        y = r * std::sin(th);
        dx = -r * w * std::sin(th);
        dy = r * w * std::cos(th);
        ddx = -r * w * w * std::cos(th);
        ddy = -r * w * w * std::sin(th);
      };
      break;
    }
    case CurveShape::figure8: {
      if (!(geom.a > 0.0) || !(geom.b > 0.0)) {
        throw std::invalid_argument("figure8 needs positive amplitudes");
      }
      const double w = 2.0 * M_PI / (count * period);
      const double a = geom.a;
      const double b = geom.b;
      curve = [a, b, w](double t, double& x, double& y, double& dx, double& dy,
                        double& ddx, double& ddy) {
        const double th = w * t;
        x = a * std::sin(th);
        y = b * std::sin(2.0 * th);
        dx = a * w * std::cos(th);
        dy = 2.0 * b * w * std::cos(2.0 * th);
        ddx = -a * w * w * std::sin(th);
        ddy = -4.0 * b * w * w * std::sin(2.0 * th);
      };
      break;
    }
  }

  ReferenceTrajectory traj;
  traj.period = period;
  traj.points.reserve(count);

  double prev_phi = 0.0;
  for (int k = 0; k < count; ++k) {
    double x, y, dx, dy, ddx, ddy;
    curve(k * period, x, y, dx, dy, ddx, ddy);

    const double v = std::hypot(dx, dy);
    if (!(v > 1e-12)) {
      std::ostringstream os;
      os << "reference curve has zero speed at sample " << k;
      throw std::invalid_argument(os.str());
    }

    // Heading from the velocity direction, unwrapped for continuity.
    double phi = std::atan2(dy, dx);
    if (k > 0) {
      while (phi - prev_phi > M_PI) phi -= 2.0 * M_PI;
      while (phi - prev_phi < -M_PI) phi += 2.0 * M_PI;
    }
    prev_phi = phi;

    // Curvature gives the turn rate, which fixes the steering angle.
    const double phidot = (dx * ddy - dy * ddx) / (v * v);
    const double steer = std::atan(p.wheelbase * phidot / v);
    if (!(std::abs(steer) < kHalfPi)) {
      std::ostringstream os;
      os << "reference curve needs steering outside (-pi/2, pi/2) at sample " << k;
      throw std::invalid_argument(os.str());
    }

    ReferencePoint pt;
    pt.state = State{x, y, phi};
    pt.control = Control{v, steer};
    pt.xdot = Vec3(dx, dy, phidot);
    traj.points.push_back(pt);
  }
  return traj;
}

std::vector<int> select_linearization_points(const ReferenceTrajectory& traj,
                                             const RobotParams& p,
                                             double delta_threshold) {
  if (traj.points.empty()) {
    throw std::invalid_argument("trajectory is empty");
  }
  if (delta_threshold < 0.0) {
    throw std::invalid_argument("delta_threshold must be >= 0");
  }

  const int count = traj.size();
  std::vector<int> assign(count, 0);
  std::vector<Vec3> f(count);
  for (int i = 0; i < count; ++i) {
    f[i] = dynamics(traj.points[i].state, traj.points[i].control, p);
  }

  int base = 0;
  double accum = 0.0;  // L1 drift of the derivative accumulated since `base`
  for (int j = 1; j < count; ++j) {
    const double fs = accum + (f[j] - f[base]).lpNorm<1>();
    if (fs >= delta_threshold) {
      // Re-base on the previous point; when that point is already the base,
      // the current point starts its own model.
      if (j - 1 > base) {
        base = j - 1;
        assign[j - 1] = base;
        const double rest = (f[j] - f[base]).lpNorm<1>();
        if (rest >= delta_threshold) {
          base = j;
          accum = 0.0;
        } else {
          accum = rest;
        }
      } else {
        base = j;
        accum = 0.0;
      }
      assign[j] = base;
    } else {
      assign[j] = base;
      accum = fs;
    }
  }
  return assign;
}

}  // namespace latmpc
