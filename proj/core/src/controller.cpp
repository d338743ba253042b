#include "pedi/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "pedi/hash.hpp"

namespace pedi {

void ControllerConfig::validate() const {
  if (!(damping > 0.0)) throw std::invalid_argument("ControllerConfig: damping must be > 0");
  if (max_iters < 1) throw std::invalid_argument("ControllerConfig: max_iters must be >= 1");
  if (!(lowpass_alpha > 0.0 && lowpass_alpha <= 1.0)) {
    throw std::invalid_argument("ControllerConfig: lowpass_alpha must be in (0, 1]");
  }
  if (std::abs(control_period - 0.02) > 1e-12) {
    throw std::invalid_argument("ControllerConfig: control_period must be 0.02 s (50 Hz)");
  }
  if (!(max_lin_vel > 0.0 && max_yaw_rate > 0.0)) {
    throw std::invalid_argument("ControllerConfig: velocity limits must be positive");
  }
  if (lead_ticks < 0.0) throw std::invalid_argument("ControllerConfig: lead_ticks must be >= 0");
}

std::string RewardWeights::canonical_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "pos_xy=" << pos_xy << ";pos_z=" << pos_z << ";ori=" << ori << ";ee_accel=" << ee_accel
     << ";base_accel=" << base_accel << ";sigma_xy=" << sigma_xy << ";sigma_z=" << sigma_z
     << ";sigma_theta=" << sigma_theta << ";theta_dot=direction";
  return os.str();
}

std::string RewardWeights::config_hash() const { return sha256_hex(canonical_text()); }

namespace {

// Target for this tick: the desired point pushed forward along the
// lookahead, then shifted for the base motion expected over the same lead.
Vec3 lead_target(const RobotState& state, const ManipulationCommand& cmd,
                 const ControllerConfig& cfg) {
  const Vec3 slope = (cmd.lookahead[2] - cmd.desired_point) / 3.0;
  Vec3 target = cmd.desired_point + cfg.lead_ticks * slope;
  const double lead_time = cfg.lead_ticks * cfg.control_period;
  const Quat to_body = state.base.orientation.conjugate();
  const Vec3 v_body = to_body.rotate(state.base_lin_vel);
  const Vec3 w_body = to_body.rotate(state.base_ang_vel);
  target -= lead_time * (v_body + w_body.cross(target));
  return target;
}

}  // namespace

namespace {

// GCC 11 flags JacobiSVD's fixed-size storage as maybe-uninitialized; it is not.
#if defined(__GNUC__) && !defined(__clang__)
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wmaybe-uninitialized"
#endif

// Clamped damped least squares on one leg, in place. Damping adapts
// (Levenberg-Marquardt style) so that position error never grows; far
// targets then settle on the closest reachable point instead of chattering
// around the straight-leg singularity.
// Bit k of `frozen` holds leg joint k fixed.
void dls_iterate(const QuadrupedModel& model, Leg leg, const Vec3& target, const Vec3& desired_dir,
                 const ControllerConfig& cfg, int iters, JointVector& q, unsigned frozen = 0) {
  const int base = kJointsPerLeg * leg_index(leg);
  constexpr double kMaxStep = 0.35;  // rad per iteration
  double lambda = cfg.damping;
  double err_norm = (target - toe_position_body(model, q, leg)).norm();
  for (int it = 0; it < iters; ++it) {
    if (err_norm < 1e-10) break;
    const Vec3 err = target - toe_position_body(model, q, leg);
    Mat3 j = jacobian(model, q, leg);
    for (int k = 0; k < kJointsPerLeg; ++k) {
      if (frozen & (1u << k)) j.col(k).setZero();
    }
    if (frozen == 0 && std::abs(j.determinant()) < 1e-6) lambda = std::max(lambda, 10.0 * cfg.damping);

    // Orientation only moves the leg along directions the position task
    // cannot see (singular configurations).
    const Eigen::JacobiSVD<Mat3> svd(j, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Mat3 null = Mat3::Zero();
    for (int k = 0; k < 3; ++k) {
      if (sv[k] < 1e-3 * std::max(sv[0], 1e-12)) {
        null += svd.matrixV().col(k) * svd.matrixV().col(k).transpose();
      }
    }
    Vec3 secondary = Vec3::Zero();
    if (!null.isZero(0.0) && cfg.pos_weight > 0.0) {
      const Vec3 dir = toe_direction_body(model, q, leg);
      const Mat3 jd = direction_jacobian(model, q, leg);
      secondary = (cfg.ori_weight / cfg.pos_weight) * null * jd.transpose() * (desired_dir - dir);
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      // Joints pinned at a limit and pushed outwards drop out of the solve.
      Mat3 ja = j;
      Vec3 dq = Vec3::Zero();
      // Frozen columns are already zero and stay out of the pass below.
      for (int pass = 0; pass < kJointsPerLeg; ++pass) {
        const Mat3 jjt = ja * ja.transpose() + lambda * Mat3::Identity();
        dq = ja.transpose() * jjt.ldlt().solve(err);
        // The secondary motion only rides along on the first try.
        if (attempt == 0) dq += secondary;
        bool pinned = false;
        for (int k = 0; k < kJointsPerLeg; ++k) {
          const int i = base + k;
          const bool at_lo = q[i] <= model.lower[i] && dq[k] < 0.0;
          const bool at_hi = q[i] >= model.upper[i] && dq[k] > 0.0;
          if ((at_lo || at_hi) && !ja.col(k).isZero(0.0)) {
            ja.col(k).setZero();
            pinned = true;
          }
        }
        if (!pinned) break;
      }
      for (int k = 0; k < kJointsPerLeg; ++k) {
        if (ja.col(k).isZero(0.0)) dq[k] = 0.0;
      }
      const double m = dq.cwiseAbs().maxCoeff();
      if (m > kMaxStep) dq *= kMaxStep / m;
      JointVector trial = q;
      trial.segment<kJointsPerLeg>(base) += dq;
      trial = clamp_limits(model, trial);
      const double trial_norm = (target - toe_position_body(model, trial, leg)).norm();
      if (trial_norm <= err_norm * (1.0 + 1e-12) + 1e-14) {
        q = trial;
        err_norm = trial_norm;
        lambda = std::max(cfg.damping, lambda * 0.1);
        accepted = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) break;
  }
}

#if defined(__GNUC__) && !defined(__clang__)
#pragma GCC diagnostic pop
#endif

}  // namespace

IkResult ik_tick(const QuadrupedModel& model, const RobotState& state,
                 const ManipulationCommand& cmd, const ControllerConfig& cfg) {
  const Leg leg = leg_from_flag(cmd.flag);
  const int base = kJointsPerLeg * leg_index(leg);
  const Vec3 target = lead_target(state, cmd, cfg);
  const Vec3 desired_dir = cmd.desired_orientation.z_axis();
  const auto residual = [&](const JointVector& q) {
    return (target - toe_position_body(model, q, leg)).norm();
  };

  JointVector q = model.stance;
  q.segment<kJointsPerLeg>(base) = state.q.segment<kJointsPerLeg>(base);
  q = clamp_limits(model, q);
  dls_iterate(model, leg, target, desired_dir, cfg, cfg.max_iters, q);

  // Clamped DLS can stall against a joint limit. Retry from canonical
  // postures and keep a clearly better one. Out of reach there is no exact
  // solution to stick to, so any strictly closer posture wins.
  constexpr double kStall = 1e-3;  // m
  const bool out_of_reach = !in_workspace(model, Pose::identity(), leg, target);
  const double hysteresis = out_of_reach ? 1e-9 : kStall;
  double best = residual(q);
  if (best > kStall) {
    const LegJoints seeds[] = {
        {0.0, state.q[base + 1], state.q[base + 2]},
        model.leg_q(model.stance, leg),
        {0.0, -1.2, -1.5},
        {0.0, -2.2, 1.5},
        {0.0, 1.2, 1.5},
    };
    const auto consider = [&](JointVector trial) {
      const double r = residual(trial);
      if (r < best - hysteresis) {
        best = r;
        q = trial;
      }
    };
    for (const LegJoints& seed : seeds) {
      JointVector trial = q;
      trial.segment<kJointsPerLeg>(base) = seed;
      trial = clamp_limits(model, trial);
      dls_iterate(model, leg, target, desired_dir, cfg, 4 * cfg.max_iters, trial);
      consider(trial);
    }
    if (out_of_reach) {
      // The closest point is usually the straight leg aimed at the target.
      // Solving the hips with the knee held straight avoids the crawl along
      // the singular straight-knee valley.
      const int knee = base + 2;
      const double straight = std::clamp(0.0, model.lower[knee], model.upper[knee]);
      for (const LegJoints& hips : {LegJoints(state.q.segment<kJointsPerLeg>(base)), model.leg_q(model.stance, leg)}) {
        JointVector trial = q;
        trial.segment<kJointsPerLeg>(base) = hips;
        trial[knee] = straight;
        trial = clamp_limits(model, trial);
        dls_iterate(model, leg, target, desired_dir, cfg, 4 * cfg.max_iters, trial, 1u << 2);
        dls_iterate(model, leg, target, desired_dir, cfg, cfg.max_iters, trial);
        consider(trial);
      }
    }
    // Joints with more than a full turn of travel reach the same angle from
    // two sides; a limit can block the better side.
    for (int k = 0; k < kJointsPerLeg; ++k) {
      const int i = base + k;
      if (model.upper[i] - model.lower[i] <= 2.0 * M_PI) continue;
      for (double turn : {-2.0 * M_PI, 2.0 * M_PI}) {
        JointVector trial = q;
        trial[i] += turn;
        if (trial[i] < model.lower[i] || trial[i] > model.upper[i]) continue;
        dls_iterate(model, leg, target, desired_dir, cfg, 4 * cfg.max_iters, trial);
        consider(trial);
      }
    }
  }

  IkResult out;
  out.q_desired = q;
  out.residual = best;
  out.out_of_reach = out_of_reach;
  return out;
}

BaseVelocityCommand gait_base_update(const QuadrupedModel& model, const RobotState& state,
                                     const ManipulationCommand& cmd, const ControllerConfig& cfg) {
  (void)state;
  const Leg leg = leg_from_flag(cmd.flag);
  // The leg's sagittal plane sits hip_offset to the side of the mount.
  const Vec3 plane = model.mount[static_cast<std::size_t>(leg_index(leg))].position +
                     Vec3(0.0, QuadrupedModel::side(leg) * model.hip_offset, 0.0);
  const Vec3 d = cmd.desired_point - plane;
  const double comfort = cfg.comfort_fraction * model.reach();
  const double horizontal_target = std::sqrt(std::max(0.0, comfort * comfort - d.z() * d.z()));
  const double horizontal = std::hypot(d.x(), d.y());
  const double excess = horizontal - horizontal_target;
  const bool far = excess > cfg.comfort_deadband;

  // Too close to fold the leg onto: step straight back, which also brings
  // points above or behind the hip out in front of it.
  const double crowding = cfg.min_fraction * model.reach() - d.norm();

  BaseVelocityCommand out;
  if (far) {
    const double speed = std::min(cfg.gait_lin_gain * excess, cfg.max_lin_vel);
    out.vx = speed * d.x() / horizontal;
    out.vy = speed * d.y() / horizontal;
  } else if (crowding > 0.0) {
    out.vx = -std::min(cfg.backoff_gain * crowding, cfg.max_lin_vel);
  }
  // Turn towards far points, and keep nearby points ahead in the leg plane;
  // points close under or behind the hip need no turning.
  constexpr double kMinTurnRange = 0.1;  // m
  if (far || (horizontal > kMinTurnRange && d.x() > 0.0)) {
    const double bearing = std::atan2(d.y(), d.x());
    out.yaw_rate = std::clamp(cfg.gait_yaw_gain * bearing, -cfg.max_yaw_rate, cfg.max_yaw_rate);
  }
  return out;
}

JointVector lowpass(const JointVector& prev, const JointVector& raw, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("lowpass: alpha must be in (0, 1]");
  return alpha * raw + (1.0 - alpha) * prev;
}

JointVector pd_torque(const JointVector& q_desired, const JointVector& q, const JointVector& qd,
                      const JointVector& kp, const JointVector& kd, double torque_limit) {
  const JointVector tau = kp.cwiseProduct(q_desired - q) - kd.cwiseProduct(qd);
  return tau.cwiseMax(-torque_limit).cwiseMin(torque_limit);
}

RewardTerms reward_from_errors(double xy_err2, double z_err2, double direction_dot,
                               double ee_accel2, double base_accel2, const RewardWeights& w) {
  RewardTerms r;
  r.pos_xy = w.pos_xy * std::exp(-xy_err2 / w.sigma_xy);
  r.pos_z = w.pos_z * std::exp(-z_err2 / w.sigma_z);
  r.ori = w.ori * std::exp(-(1.0 - direction_dot) / w.sigma_theta);
  r.ee_accel = w.ee_accel * ee_accel2;
  r.base_accel = w.base_accel * base_accel2;
  r.total = r.pos_xy + r.pos_z + r.ori + r.ee_accel + r.base_accel;
  return r;
}

RewardTerms compute_reward(const QuadrupedModel& model, std::span<const RobotState> window,
                           const ManipulationCommand& cmd, const RewardWeights& w, double dt) {
  if (window.size() < 3) throw std::invalid_argument("compute_reward: need at least 3 states");
  if (!(dt > 0.0)) throw std::invalid_argument("compute_reward: dt must be > 0");
  const Leg leg = leg_from_flag(cmd.flag);
  const RobotState& now = window.back();
  const RobotState& mid = window[window.size() - 2];
  const RobotState& old = window[window.size() - 3];

  const Vec3 err = toe_position_body(model, now.q, leg) - cmd.desired_point;
  const double xy2 = err.x() * err.x() + err.y() * err.y();
  const double z2 = err.z() * err.z();
  const double dot = toe_direction_body(model, now.q, leg).dot(cmd.desired_orientation.z_axis());

  const auto toe_world = [&](const RobotState& s) {
    return transform_point(s.base, toe_position_body(model, s.q, leg));
  };
  const Vec3 ee_acc = (toe_world(now) - 2.0 * toe_world(mid) + toe_world(old)) / (dt * dt);
  const Vec3 base_acc =
      (now.base.position - 2.0 * mid.base.position + old.base.position) / (dt * dt);
  return reward_from_errors(xy2, z2, dot, ee_acc.squaredNorm(), base_acc.squaredNorm(), w);
}

OracleController::OracleController(const QuadrupedModel& model, ControllerConfig cfg)
    : model_(&model), cfg_(std::move(cfg)), filter_(model.stance) {
  cfg_.validate();
}

void OracleController::reset(const RobotState& state) { filter_ = state.q; }

OracleController::Output OracleController::act(const RobotState& state,
                                               const ManipulationCommand& cmd) {
  Output out;
  const IkResult ik = ik_tick(*model_, state, cmd, cfg_);
  out.action = ik.q_desired;
  out.out_of_reach = ik.out_of_reach;
  filter_ = lowpass(filter_, out.action, cfg_.lowpass_alpha);
  out.filtered = filter_;
  out.torque = pd_torque(out.filtered, state.q, state.qd, cfg_.kp, cfg_.kd, cfg_.torque_limit);
  out.base = gait_base_update(*model_, state, cmd, cfg_);
  return out;
}

}  // namespace pedi
