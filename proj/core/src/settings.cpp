#include "pedi/settings.hpp"

#include <sstream>

namespace pedi {

namespace {

std::string str(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string pair(const Interval& i) { return str(i.lo) + " " + str(i.hi); }

Interval interval(const Settings& s, const char* key) {
  const auto v = s.get_doubles(key);
  if (v.size() != 2) throw ConfigError(s.origin(key), 0, key, "expected two numbers: lo hi");
  return {v[0], v[1]};
}

// Either one gain for all twelve joints or twelve values.
JointVector joint_gains(const Settings& s, const char* key) {
  const auto v = s.get_doubles(key);
  if (v.size() == 1) return JointVector::Constant(v[0]);
  if (v.size() != static_cast<std::size_t>(kNumJoints)) {
    throw ConfigError(s.origin(key), 0, key, "expected 1 or 12 values");
  }
  JointVector out;
  for (int i = 0; i < kNumJoints; ++i) out[i] = v[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace

Settings make_settings() {
  const SimConfig sim;
  const ControllerConfig c;
  const RewardWeights w;
  const ExpertConfig e;
  const RandomizationRanges r;
  Settings s;
  s.declare("sim.control_period", str(sim.control_period), "controller tick, s");
  s.declare("sim.planner_every", str(sim.planner_every), "control ticks per planner tick");
  s.declare("sim.duration", str(sim.duration), "episode length, s");
  s.declare("sim.joint_time_constant", str(sim.joint_time_constant), "joint tracking lag, s");
  s.declare("sim.joint_rate_limit", str(sim.joint_rate_limit), "joint speed limit, rad/s");
  s.declare("sim.cloud_points", str(sim.cloud_points), "points per observation cloud");
  s.declare("sim.toe_radius", str(sim.toe_radius), "toe contact radius, m");

  s.declare("controller.damping", str(c.damping), "damped least-squares lambda");
  s.declare("controller.max_iters", str(c.max_iters), "IK iterations per tick");
  s.declare("controller.kp", str(c.kp[0]), "PD stiffness, one value or twelve");
  s.declare("controller.kd", str(c.kd[0]), "PD damping, one value or twelve");
  s.declare("controller.torque_limit", str(c.torque_limit), "N m");
  s.declare("controller.lowpass_alpha", str(c.lowpass_alpha), "action filter coefficient in (0, 1]");
  s.declare("controller.pos_weight", str(c.pos_weight), "IK position weight");
  s.declare("controller.ori_weight", str(c.ori_weight), "IK orientation weight");
  s.declare("controller.lead_ticks", str(c.lead_ticks), "feed-forward along the lookahead, ticks");
  s.declare("controller.max_lin_vel", str(c.max_lin_vel), "base speed limit, m/s");
  s.declare("controller.max_yaw_rate", str(c.max_yaw_rate), "base yaw rate limit, rad/s");
  s.declare("controller.gait_lin_gain", str(c.gait_lin_gain), "base pursuit gain, 1/s");
  s.declare("controller.gait_yaw_gain", str(c.gait_yaw_gain), "base heading gain, 1/s");
  s.declare("controller.comfort_fraction", str(c.comfort_fraction), "comfortable distance / reach");
  s.declare("controller.comfort_deadband", str(c.comfort_deadband), "m");
  s.declare("controller.min_fraction", str(c.min_fraction), "crowding distance / reach");
  s.declare("controller.backoff_gain", str(c.backoff_gain), "1/s");

  s.declare("reward.pos_xy", str(w.pos_xy), "weight");
  s.declare("reward.pos_z", str(w.pos_z), "weight");
  s.declare("reward.ori", str(w.ori), "weight");
  s.declare("reward.ee_accel", str(w.ee_accel), "weight");
  s.declare("reward.base_accel", str(w.base_accel), "weight");
  s.declare("reward.sigma_xy", str(w.sigma_xy), "m^2");
  s.declare("reward.sigma_z", str(w.sigma_z), "m^2");
  s.declare("reward.sigma_theta", str(w.sigma_theta), "");

  s.declare("expert.start_tolerance", str(e.start_tolerance), "m");
  s.declare("expert.replan_distance", str(e.replan_distance), "m");
  s.declare("expert.replan_angle", str(e.replan_angle), "rad");

  s.declare("ranges.p_xy", pair(r.p_xy), "control point x and y bounds, m");
  s.declare("ranges.p_z", pair(r.p_z), "control point z bounds, m");
  s.declare("ranges.w", pair(r.w), "weight bounds");
  s.declare("ranges.duration", str(r.duration), "sampled trajectory duration, s");
  return s;
}

RunConfig run_config_from(const Settings& s) {
  RunConfig rc;
  rc.sim.control_period = s.get_double("sim.control_period");
  rc.sim.planner_every = s.get_int("sim.planner_every");
  rc.sim.duration = s.get_double("sim.duration");
  rc.sim.joint_time_constant = s.get_double("sim.joint_time_constant");
  rc.sim.joint_rate_limit = s.get_double("sim.joint_rate_limit");
  rc.sim.cloud_points = s.get_int("sim.cloud_points");
  rc.sim.toe_radius = s.get_double("sim.toe_radius");

  ControllerConfig& c = rc.controller;
  c.control_period = rc.sim.control_period;
  c.damping = s.get_double("controller.damping");
  c.max_iters = s.get_int("controller.max_iters");
  c.kp = joint_gains(s, "controller.kp");
  c.kd = joint_gains(s, "controller.kd");
  c.torque_limit = s.get_double("controller.torque_limit");
  c.lowpass_alpha = s.get_double("controller.lowpass_alpha");
  c.pos_weight = s.get_double("controller.pos_weight");
  c.ori_weight = s.get_double("controller.ori_weight");
  c.lead_ticks = s.get_double("controller.lead_ticks");
  c.max_lin_vel = s.get_double("controller.max_lin_vel");
  c.max_yaw_rate = s.get_double("controller.max_yaw_rate");
  c.gait_lin_gain = s.get_double("controller.gait_lin_gain");
  c.gait_yaw_gain = s.get_double("controller.gait_yaw_gain");
  c.comfort_fraction = s.get_double("controller.comfort_fraction");
  c.comfort_deadband = s.get_double("controller.comfort_deadband");
  c.min_fraction = s.get_double("controller.min_fraction");
  c.backoff_gain = s.get_double("controller.backoff_gain");
  rc.sim.max_lin_vel = c.max_lin_vel;
  rc.sim.max_yaw_rate = c.max_yaw_rate;

  RewardWeights& w = rc.weights;
  w.pos_xy = s.get_double("reward.pos_xy");
  w.pos_z = s.get_double("reward.pos_z");
  w.ori = s.get_double("reward.ori");
  w.ee_accel = s.get_double("reward.ee_accel");
  w.base_accel = s.get_double("reward.base_accel");
  w.sigma_xy = s.get_double("reward.sigma_xy");
  w.sigma_z = s.get_double("reward.sigma_z");
  w.sigma_theta = s.get_double("reward.sigma_theta");

  rc.expert.start_tolerance = s.get_double("expert.start_tolerance");
  rc.expert.replan_distance = s.get_double("expert.replan_distance");
  rc.expert.replan_angle = s.get_double("expert.replan_angle");

  rc.ranges.p_xy = interval(s, "ranges.p_xy");
  rc.ranges.p_z = interval(s, "ranges.p_z");
  rc.ranges.w = interval(s, "ranges.w");
  rc.ranges.duration = s.get_double("ranges.duration");

  try {
    rc.sim.validate();
    rc.controller.validate();
    rc.ranges.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("settings", 0, "", e.what());
  }
  if (!(w.sigma_xy > 0 && w.sigma_z > 0 && w.sigma_theta > 0)) {
    throw ConfigError("settings", 0, "reward.sigma_*", "length scales must be positive");
  }
  return rc;
}

}  // namespace pedi
