#pragma once

#include <Eigen/Dense>

namespace latmpc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using MatX = Eigen::MatrixXd;

// Planar pose of the vehicle: position and heading.
struct State {
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;

  Vec3 vec() const { return Vec3(x, y, phi); }
  static State from_vec(const Vec3& v) { return State{v(0), v(1), v(2)}; }
};

// Forward velocity and steering angle of the front wheel.
struct Control {
  double v = 0.0;
  double steer = 0.0;

  Vec2 vec() const { return Vec2(v, steer); }
  static Control from_vec(const Vec2& u) { return Control{u(0), u(1)}; }
};

struct RobotParams {
  double wheelbase = 0.1;  // distance between front and rear axle, > 0
};

}  // namespace latmpc
