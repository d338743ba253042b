#include "pedi/curves.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pedi {
namespace {

void check_inputs(std::span<const Vec3> points, std::span<const double> weights, double t) {
  if (points.empty() || points.size() != weights.size()) {
    throw std::invalid_argument("bezier: need matching non-empty point and weight lists");
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::out_of_range("bezier: phase " + std::to_string(t) + " outside [0, 1]");
  }
}

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

void RationalBezier::validate() const {
  for (int i = 0; i < kControlPoints; ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw std::invalid_argument("RationalBezier: weight " + std::to_string(i) +
                                  " must be positive and finite");
    }
    if (!points[i].allFinite()) {
      throw std::invalid_argument("RationalBezier: control point " + std::to_string(i) +
                                  " is not finite");
    }
  }
}

Vec3 bezier_eval(std::span<const Vec3> points, std::span<const double> weights, double t) {
  check_inputs(points, weights, t);
  const int n = static_cast<int>(points.size()) - 1;
  const double s = 1.0 - t;
  Vec3 num = Vec3::Zero();
  double den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double b = binomial(n, i) * std::pow(t, i) * std::pow(s, n - i) * weights[i];
    num += b * points[i];
    den += b;
  }
  return num / den;
}

Vec3 bezier_eval(const RationalBezier& curve, double t) {
  return bezier_eval(curve.points, curve.weights, t);
}

Vec3 bezier_eval_oracle(std::span<const Vec3> points, std::span<const double> weights, double t) {
  check_inputs(points, weights, t);
  std::vector<Eigen::Vector4d> h(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    h[i] << weights[i] * points[i], weights[i];
  }
  for (std::size_t level = h.size() - 1; level > 0; --level) {
    for (std::size_t i = 0; i < level; ++i) h[i] = (1.0 - t) * h[i] + t * h[i + 1];
  }
  return h[0].head<3>() / h[0][3];
}

Vec3 bezier_eval_oracle(const RationalBezier& curve, double t) {
  return bezier_eval_oracle(curve.points, curve.weights, t);
}

Quat slerp(const Quat& q0, const Quat& q1_in, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::out_of_range("slerp: phase " + std::to_string(t) + " outside [0, 1]");
  }
  Quat q1 = q1_in;
  double c = q0.dot(q1);
  if (c < 0.0) {
    q1 = -q1;
    c = -c;
  }
  const auto a = q0.wxyz();
  const auto b = q1.wxyz();
  // Half-angle between the 4-vectors, computed without acos cancellation.
  std::array<double, 4> d{};
  for (int i = 0; i < 4; ++i) d[i] = b[i] - c * a[i];
  const double s = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + d[3] * d[3]);
  const double theta = std::atan2(s, c);
  double k0 = 1.0 - t;
  double k1 = t;
  if (theta >= 1e-6) {
    const double st = std::sin(theta);
    k0 = std::sin((1.0 - t) * theta) / st;
    k1 = std::sin(t * theta) / st;
  }
  return {k0 * a[0] + k1 * b[0], k0 * a[1] + k1 * b[1], k0 * a[2] + k1 * b[2],
          k0 * a[3] + k1 * b[3]};
}

Quat slerp(const OrientationTrack& track, double t) { return slerp(track.start, track.end, t); }

double phase(const PhaseClock& clock, double t_now) {
  if (!(clock.duration > 0.0)) throw std::invalid_argument("PhaseClock: duration must be > 0");
  return std::clamp((t_now - clock.t_start) / clock.duration, 0.0, 1.0);
}

std::vector<Vec3> lookahead_points(const RationalBezier& curve, const PhaseClock& clock,
                                   double t_now, double dt, int k) {
  if (!(dt > 0.0)) throw std::invalid_argument("lookahead_points: dt must be > 0");
  if (k < 1) throw std::invalid_argument("lookahead_points: k must be >= 1");
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int j = 1; j <= k; ++j) out.push_back(bezier_eval(curve, phase(clock, t_now + j * dt)));
  return out;
}

}  // namespace pedi
