#pragma once

#include <array>
#include <span>
#include <vector>

#include "pedi/geometry.hpp"

namespace pedi {

inline constexpr int kCurveOrder = 6;
inline constexpr int kControlPoints = kCurveOrder + 1;

// Degree-6 rational Bezier curve. Weights must be strictly positive;
// scaling all of them by a common factor leaves the curve unchanged.
struct RationalBezier {
  std::array<Vec3, kControlPoints> points{};
  std::array<double, kControlPoints> weights{1, 1, 1, 1, 1, 1, 1};

  void validate() const;
};

// Bernstein-form evaluation. Works for any order (points.size() - 1) so
// small curves with closed forms can be checked directly.
// Throws std::out_of_range if t is outside [0, 1]; clamping belongs to phase().
Vec3 bezier_eval(std::span<const Vec3> points, std::span<const double> weights, double t);
Vec3 bezier_eval(const RationalBezier& curve, double t);

// Independent evaluation by homogeneous de Casteljau recursion: control
// points are lifted to (w p, w), interpolated, then projected.
Vec3 bezier_eval_oracle(std::span<const Vec3> points, std::span<const double> weights, double t);
Vec3 bezier_eval_oracle(const RationalBezier& curve, double t);

struct OrientationTrack {
  Quat start;
  Quat end;
};

// Spherical interpolation along the shorter arc. Falls back to normalized
// linear interpolation when the endpoints are closer than 1e-6 rad.
Quat slerp(const Quat& q0, const Quat& q1, double t);
Quat slerp(const OrientationTrack& track, double t);

struct PhaseClock {
  double t_start = 0.0;
  double duration = 1.0;
};

// Normalized trajectory progress, held at 0 before the start and at 1 after the end.
double phase(const PhaseClock& clock, double t_now);

// Curve points at t_now + j * dt for j = 1..k, held at the endpoint.
std::vector<Vec3> lookahead_points(const RationalBezier& curve, const PhaseClock& clock,
                                   double t_now, double dt, int k);

}  // namespace pedi
