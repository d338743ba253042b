#pragma once

#include <span>

#include "pedi/model.hpp"
#include "pedi/params.hpp"

namespace pedi {

struct ControllerConfig {
  double damping = 1e-3;           // DLS lambda, rad^2; x10 near singular Jacobians
  int max_iters = 10;              // DLS iterations per control tick
  JointVector kp = JointVector::Constant(60.0);   // N m / rad
  JointVector kd = JointVector::Constant(2.0);    // N m s / rad
  double torque_limit = 44.0;      // N m
  double lowpass_alpha = 0.2;
  double pos_weight = 1.0;
  double ori_weight = 0.1;
  double control_period = 0.02;    // s, 50 Hz
  // Feed-forward along the lookahead, in ticks, to cancel the delay of
  // the action filter and the actuator lag.
  double lead_ticks = 6.5;
  double max_lin_vel = 0.6;        // m/s
  double max_yaw_rate = 1.0;       // rad/s
  double gait_lin_gain = 2.0;      // 1/s
  double gait_yaw_gain = 1.5;      // 1/s
  double comfort_fraction = 0.7;   // comfortable hip-to-target distance / reach
  double comfort_deadband = 0.02;  // m
  double min_fraction = 0.55;      // closer than this * reach, the base backs away
  double backoff_gain = 4.0;       // 1/s

  void validate() const;
};

// Tracking reward weights and length scales. sigma_z defaults to
// sigma_xy / 5, which makes the height term five times more sensitive.
struct RewardWeights {
  double pos_xy = 0.8;
  double pos_z = 0.8;
  double ori = 0.3;
  double ee_accel = -5.0;
  double base_accel = -5.0;
  double sigma_xy = 0.25;   // m^2
  double sigma_z = 0.05;    // m^2
  double sigma_theta = 0.25;

  std::string canonical_text() const;
  std::string config_hash() const;
};

struct IkResult {
  JointVector q_desired = JointVector::Zero();
  bool out_of_reach = false;
  double residual = 0.0;  // m, toe-to-target distance of the returned posture
};

// Damped least-squares step for the flagged leg towards the command;
// other legs are sent to stance. Orientation is a strictly secondary
// objective, applied only in the position task's null space.
IkResult ik_tick(const QuadrupedModel& model, const RobotState& state,
                 const ManipulationCommand& cmd, const ControllerConfig& cfg);

// Base velocity in the base frame.
struct BaseVelocityCommand {
  double vx = 0.0;
  double vy = 0.0;
  double yaw_rate = 0.0;
};

// Proportional pursuit keeping the desired point within a comfortable
// distance of the flagged leg's hip.
BaseVelocityCommand gait_base_update(const QuadrupedModel& model, const RobotState& state,
                                     const ManipulationCommand& cmd, const ControllerConfig& cfg);

JointVector lowpass(const JointVector& prev, const JointVector& raw, double alpha);

JointVector pd_torque(const JointVector& q_desired, const JointVector& q, const JointVector& qd,
                      const JointVector& kp, const JointVector& kd, double torque_limit);

// Weighted terms; `total` is their sum.
struct RewardTerms {
  double pos_xy = 0.0;
  double pos_z = 0.0;
  double ori = 0.0;
  double ee_accel = 0.0;
  double base_accel = 0.0;
  double total = 0.0;
};

RewardTerms reward_from_errors(double xy_err2, double z_err2, double direction_dot,
                               double ee_accel2, double base_accel2, const RewardWeights& w);

// Reward of the newest state in `window` (>= 3 consecutive states, oldest
// first, spaced by dt). Accelerations are central second differences.
RewardTerms compute_reward(const QuadrupedModel& model, std::span<const RobotState> window,
                           const ManipulationCommand& cmd, const RewardWeights& w, double dt);

// IK oracle plus action filter and PD law. Holds the filter memory, so
// use one instance per episode.
class OracleController {
 public:
  struct Output {
    JointVector action = JointVector::Zero();    // raw desired joint positions
    JointVector filtered = JointVector::Zero();  // after the low-pass filter
    JointVector torque = JointVector::Zero();
    BaseVelocityCommand base;
    bool out_of_reach = false;
  };

  OracleController(const QuadrupedModel& model, ControllerConfig cfg);

  void reset(const RobotState& state);
  Output act(const RobotState& state, const ManipulationCommand& cmd);

  const ControllerConfig& config() const { return cfg_; }

 private:
  const QuadrupedModel* model_;
  ControllerConfig cfg_;
  JointVector filter_;
};

}  // namespace pedi
