#pragma once

#include <array>
#include <filesystem>
#include <string>

#include <Eigen/Core>

#include "pedi/config.hpp"
#include "pedi/geometry.hpp"

namespace pedi {

// Leg order is fixed; joints per leg are [abduction, hip flexion, knee].
enum class Leg : int { FL = 0, FR = 1, RL = 2, RR = 3 };

inline constexpr int kNumLegs = 4;
inline constexpr int kJointsPerLeg = 3;
inline constexpr int kNumJoints = kNumLegs * kJointsPerLeg;

using JointVector = Eigen::Matrix<double, kNumJoints, 1>;
using LegJoints = Eigen::Vector3d;

inline Leg leg_from_flag(int flag) { return flag == 0 ? Leg::FL : Leg::FR; }
inline int leg_index(Leg leg) { return static_cast<int>(leg); }
const char* leg_name(Leg leg);

struct QuadrupedModel {
  std::array<Pose, kNumLegs> mount{};  // abduction joint frames in the base frame
  double hip_offset = 0.083;
  double thigh = 0.25;
  double shank = 0.25;
  JointVector lower = JointVector::Constant(-1.0);
  JointVector upper = JointVector::Constant(1.0);
  JointVector stance = JointVector::Zero();

  double reach() const { return thigh + shank; }
  // +1 for left legs, -1 for right legs.
  static double side(Leg leg) { return (leg == Leg::FL || leg == Leg::RL) ? 1.0 : -1.0; }
  // Base height at which the stance toes rest on z = 0.
  double stance_height() const;

  LegJoints leg_q(const JointVector& q, Leg leg) const {
    return q.segment<kJointsPerLeg>(kJointsPerLeg * leg_index(leg));
  }

  void validate() const;
  // Canonical text; hashing it identifies the model in dataset headers.
  std::string canonical_text() const;
  std::string config_hash() const;

  static QuadrupedModel from_config(const KeyValueFile& f);
  static QuadrupedModel load(const std::filesystem::path& path);
  // data_dir()/model/aliengo.cfg
  static QuadrupedModel load_default();
};

struct RobotState {
  Pose base;
  Vec3 base_lin_vel = Vec3::Zero();   // world frame, m/s
  Vec3 base_ang_vel = Vec3::Zero();   // world frame, rad/s
  JointVector q = JointVector::Zero();
  JointVector qd = JointVector::Zero();
  JointVector prev_action = JointVector::Zero();
  // Gravity in the base frame, magnitude 9.81 m/s^2.
  Vec3 gravity_body = Vec3(0.0, 0.0, -9.81);
};

RobotState stance_state(const QuadrupedModel& model, const Pose& base_on_ground);

// Toe position of one leg in the base frame.
Vec3 toe_position_body(const QuadrupedModel& model, const JointVector& q, Leg leg);
// Unit vector from the toe up the shank towards the knee, base frame.
Vec3 toe_direction_body(const QuadrupedModel& model, const JointVector& q, Leg leg);
// Shank direction promoted to an orientation by the minimal rotation from +z.
Quat toe_orientation_from_direction(const Vec3& direction);

// World-frame toe poses for all four legs.
std::array<Pose, kNumLegs> forward_kinematics(const QuadrupedModel& model, const JointVector& q,
                                              const Pose& base);

// d(toe position, base frame) / d(leg joints).
Mat3 jacobian(const QuadrupedModel& model, const JointVector& q, Leg leg);
// d(toe direction, base frame) / d(leg joints).
Mat3 direction_jacobian(const QuadrupedModel& model, const JointVector& q, Leg leg);

// Reachability test against the leg's sagittal radius (distance from the
// flexion axis once the lateral hip offset is removed): the point is in
// the workspace iff that radius lies in (0.05, 0.98) * reach.
bool in_workspace(const QuadrupedModel& model, const Pose& base, Leg leg, const Vec3& point_world);

JointVector clamp_limits(const QuadrupedModel& model, const JointVector& q);

}  // namespace pedi
