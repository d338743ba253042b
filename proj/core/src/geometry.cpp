#include "pedi/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace pedi {

Quat::Quat(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("Quat: zero or non-finite norm");
  }
  w_ = w / n;
  x_ = x / n;
  y_ = y / n;
  z_ = z / n;
}

Quat Quat::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw std::invalid_argument("Quat::from_axis_angle: zero axis");
  const Vec3 a = axis / n;
  const double s = std::sin(0.5 * angle);
  return {std::cos(0.5 * angle), a.x() * s, a.y() * s, a.z() * s};
}

Quat Quat::from_two_vectors(const Vec3& from, const Vec3& to) {
  const Vec3 f = from.normalized();
  const Vec3 t = to.normalized();
  const double c = f.dot(t);
  if (c < -1.0 + 1e-12) {
    // Antiparallel: any axis orthogonal to `from` works; pick a stable one.
    Vec3 axis = f.cross(Vec3::UnitX());
    if (axis.squaredNorm() < 1e-12) axis = f.cross(Vec3::UnitY());
    return from_axis_angle(axis, M_PI);
  }
  const Vec3 v = f.cross(t);
  // Half-angle construction: (1 + c, v) normalized.
  return {1.0 + c, v.x(), v.y(), v.z()};
}

Quat Quat::from_matrix(const Mat3& r) {
  const Eigen::Quaterniond q(r);
  return {q.w(), q.x(), q.y(), q.z()};
}

Quat Quat::conjugate() const {
  Quat q = *this;
  q.x_ = -x_;
  q.y_ = -y_;
  q.z_ = -z_;
  return q;
}

Quat Quat::operator-() const {
  Quat q;
  q.w_ = -w_;
  q.x_ = -x_;
  q.y_ = -y_;
  q.z_ = -z_;
  return q;
}

double Quat::norm() const { return std::sqrt(dot(*this)); }

Vec3 Quat::rotate(const Vec3& v) const {
  const Vec3 u(x_, y_, z_);
  const Vec3 t = 2.0 * u.cross(v);
  return v + w_ * t + u.cross(t);
}

Mat3 Quat::matrix() const {
  Mat3 m;
  const double xx = x_ * x_, yy = y_ * y_, zz = z_ * z_;
  const double xy = x_ * y_, xz = x_ * z_, yz = y_ * z_;
  const double wx = w_ * x_, wy = w_ * y_, wz = w_ * z_;
  m << 1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy),
       2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx),
       2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy);
  return m;
}

Quat operator*(const Quat& a, const Quat& b) {
  // Renormalized by the constructor to bound drift over long episodes.
  return {a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
          a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
          a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
          a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_};
}

double quat_angle_between(const Quat& a, const Quat& b) {
  const Quat r = a.conjugate() * b;
  const double v = std::sqrt(r.x() * r.x() + r.y() * r.y() + r.z() * r.z());
  return 2.0 * std::atan2(v, std::abs(r.w()));
}

double yaw_of(const Quat& q) {
  const Vec3 h = q.rotate(Vec3::UnitX());
  return std::atan2(h.y(), h.x());
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.position + a.orientation.rotate(b.position), a.orientation * b.orientation};
}

Pose invert(const Pose& p) {
  const Quat inv = p.orientation.conjugate();
  return {-inv.rotate(p.position), inv};
}

Vec3 transform_point(const Pose& pose, const Vec3& pt) {
  return pose.orientation.rotate(pt) + pose.position;
}

Vec3 transform_vector(const Pose& pose, const Vec3& v) { return pose.orientation.rotate(v); }

}  // namespace pedi
