#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "pedi/curves.hpp"
#include "pedi/geometry.hpp"

namespace pedi {

// Frame a parameter set is expressed in. Codes are part of the record layout.
enum class Frame : int { object = 0, world = 1, body = 2 };

std::string_view to_string(Frame f);
Frame frame_from_string(std::string_view s);

// Manipulator flag: which forelimb acts as the end-effector.
inline constexpr int kFlagFrontLeft = 0;
inline constexpr int kFlagFrontRight = 1;

struct TrajectoryParams {
  int flag = kFlagFrontRight;
  RationalBezier curve;
  OrientationTrack orientation;
  double duration = 4.0;  // seconds
  Frame frame = Frame::body;

  void validate() const;
};

// Flat numeric layout: flag, 7 points row-major, 7 weights, q_start wxyz,
// q_end wxyz, duration, frame code.
inline constexpr std::size_t kParamsRecordSize = 39;
using ParamsRecord = std::array<double, kParamsRecordSize>;

ParamsRecord to_record(const TrajectoryParams& p);
TrajectoryParams from_record(std::span<const double> r);

// Per-tick controller input, expressed in the body frame.
struct ManipulationCommand {
  int flag = kFlagFrontRight;
  Vec3 desired_point = Vec3::Zero();
  std::array<Vec3, 3> lookahead{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  Quat desired_orientation;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct RandomizationRanges {
  Interval p_xy{-2.0, 2.0};                 // m
  Interval p_z{0.01, 1.2};                  // m
  Interval w{1.0, 2000.0};
  Interval ori_phi_psi{0.0, 2.0 * M_PI};    // rad
  Interval ori_cos_theta{0.0, 1.0};
  double duration = 4.0;                    // s

  void validate() const;
};

// Orientation from the sampler's angles: intrinsic z-y-x with yaw psi,
// pitch acos(cos_theta), roll phi.
Quat orientation_from_angles(double phi, double cos_theta, double psi);

// Uniform sample over the ranges; deterministic in `seed`. Result is in the body frame.
TrajectoryParams sample_random_params(std::uint64_t seed, const RandomizationRanges& ranges = {});

// First violated range bound as a human-readable message, if any.
std::optional<std::string> check_point_in_ranges(const Vec3& p, const RandomizationRanges& r);
std::optional<std::string> check_weight_in_ranges(double w, const RandomizationRanges& r);

// Rigid action on a parameter set: points mapped through the pose,
// orientations left-multiplied by its rotation. Frame tag untouched.
TrajectoryParams transform_params(const TrajectoryParams& p, const Pose& pose);

// Re-express between frames. `frame_pose` is always the pose of the
// non-world frame (object or robot base) in the world. Supported hops:
// object<->world and world<->body. Anything else throws std::invalid_argument.
TrajectoryParams express_params(const TrajectoryParams& p, const Pose& frame_pose, Frame target);

// Command at t_now with three lookahead points spaced by dt.
// Throws std::invalid_argument unless p is body-frame.
ManipulationCommand build_command(const TrajectoryParams& p, const PhaseClock& clock,
                                  double t_now, double dt);

// Human-editable text form ("key = value" lines).
TrajectoryParams parse_params(std::istream& in, std::string source);
TrajectoryParams load_params(const std::filesystem::path& path);
void write_params(std::ostream& out, const TrajectoryParams& p);

}  // namespace pedi
