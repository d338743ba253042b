#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace pedi {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Unit quaternion, scalar-first storage (w, x, y, z). Every constructor
// normalizes, so instances are always valid rotations. q and -q describe
// the same rotation; use quat_angle_between() rather than component
// comparison when testing equality.
class Quat {
 public:
  Quat() = default;
  Quat(double w, double x, double y, double z);

  static Quat identity() { return {}; }
  static Quat from_axis_angle(const Vec3& axis, double angle);
  static Quat from_yaw(double yaw) { return from_axis_angle(Vec3::UnitZ(), yaw); }
  // Minimal rotation taking unit vector `from` onto unit vector `to`.
  static Quat from_two_vectors(const Vec3& from, const Vec3& to);
  static Quat from_matrix(const Mat3& r);

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  std::array<double, 4> wxyz() const { return {w_, x_, y_, z_}; }

  Quat conjugate() const;
  Quat operator-() const;
  double dot(const Quat& o) const { return w_ * o.w_ + x_ * o.x_ + y_ * o.y_ + z_ * o.z_; }
  double norm() const;

  Vec3 rotate(const Vec3& v) const;
  Mat3 matrix() const;
  // Image of the body z-axis; the "direction" an orientation points at.
  Vec3 z_axis() const { return rotate(Vec3::UnitZ()); }

  friend Quat operator*(const Quat& a, const Quat& b);

 private:
  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

// Geodesic rotation angle in [0, pi] between two orientations.
double quat_angle_between(const Quat& a, const Quat& b);

// Yaw of the heading (x-axis projected on the ground plane).
double yaw_of(const Quat& q);

struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation;

  static Pose identity() { return {}; }
  static Pose translation(double x, double y, double z) { return {Vec3(x, y, z), Quat()}; }
  static Pose planar(double x, double y, double yaw) { return {Vec3(x, y, 0.0), Quat::from_yaw(yaw)}; }
};

// a * b: maps points from b's child frame through b, then through a.
Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& p);
Vec3 transform_point(const Pose& pose, const Vec3& pt);
Vec3 transform_vector(const Pose& pose, const Vec3& v);

}  // namespace pedi
