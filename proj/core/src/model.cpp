#include "pedi/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pedi/hash.hpp"

namespace pedi {
namespace {

// Toe position in the abduction joint frame.
Vec3 leg_chain(const QuadrupedModel& m, const LegJoints& j, double side) {
  const double x = -m.thigh * std::sin(j[1]) - m.shank * std::sin(j[1] + j[2]);
  const double z = -m.thigh * std::cos(j[1]) - m.shank * std::cos(j[1] + j[2]);
  const double y = side * m.hip_offset;
  const double c = std::cos(j[0]);
  const double s = std::sin(j[0]);
  return {x, c * y - s * z, s * y + c * z};
}

}  // namespace

const char* leg_name(Leg leg) {
  switch (leg) {
    case Leg::FL: return "FL";
    case Leg::FR: return "FR";
    case Leg::RL: return "RL";
    case Leg::RR: return "RR";
  }
  return "?";
}

double QuadrupedModel::stance_height() const {
  return -toe_position_body(*this, stance, Leg::FL).z();
}

void QuadrupedModel::validate() const {
  if (!(hip_offset > 0.0 && thigh > 0.0 && shank > 0.0)) {
    throw std::invalid_argument("QuadrupedModel: link lengths must be positive");
  }
  for (int i = 0; i < kNumJoints; ++i) {
    if (!(lower[i] < upper[i])) {
      throw std::invalid_argument("QuadrupedModel: joint " + std::to_string(i) +
                                  " has lower limit >= upper limit");
    }
    if (stance[i] < lower[i] || stance[i] > upper[i]) {
      throw std::invalid_argument("QuadrupedModel: stance outside joint limits");
    }
  }
}

std::string QuadrupedModel::canonical_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "hip_offset=" << hip_offset << ";thigh=" << thigh << ";shank=" << shank;
  for (int l = 0; l < kNumLegs; ++l) {
    const auto& p = mount[static_cast<std::size_t>(l)];
    os << ";mount" << l << "=" << p.position.x() << "," << p.position.y() << ","
       << p.position.z();
    for (double c : p.orientation.wxyz()) os << "," << c;
  }
  for (int i = 0; i < kNumJoints; ++i) {
    os << ";j" << i << "=" << lower[i] << "," << upper[i] << "," << stance[i];
  }
  return os.str();
}

std::string QuadrupedModel::config_hash() const { return sha256_hex(canonical_text()); }

QuadrupedModel QuadrupedModel::from_config(const KeyValueFile& f) {
  static const std::vector<std::string> known = {
      "hip_offset", "thigh",      "shank",       "mount.FL",   "mount.FR", "mount.RL",
      "mount.RR",   "limits.hip", "limits.thigh", "limits.knee", "stance"};
  f.require_known(known);
  QuadrupedModel m;
  m.hip_offset = f.get_double("hip_offset");
  m.thigh = f.get_double("thigh");
  m.shank = f.get_double("shank");
  const char* mounts[] = {"mount.FL", "mount.FR", "mount.RL", "mount.RR"};
  for (int l = 0; l < kNumLegs; ++l) {
    const auto v = f.get_doubles(mounts[l], 3);
    m.mount[static_cast<std::size_t>(l)] = Pose::translation(v[0], v[1], v[2]);
  }
  const auto hip = f.get_doubles("limits.hip", 2);
  const auto th = f.get_doubles("limits.thigh", 2);
  const auto kn = f.get_doubles("limits.knee", 2);
  const auto st = f.get_doubles("stance", 3);
  for (int l = 0; l < kNumLegs; ++l) {
    const int b = kJointsPerLeg * l;
    m.lower.segment<3>(b) << hip[0], th[0], kn[0];
    m.upper.segment<3>(b) << hip[1], th[1], kn[1];
    m.stance.segment<3>(b) << st[0], st[1], st[2];
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(f.source(), 0, "", e.what());
  }
  return m;
}

QuadrupedModel QuadrupedModel::load(const std::filesystem::path& path) {
  return from_config(KeyValueFile::load(path));
}

QuadrupedModel QuadrupedModel::load_default() { return load(data_dir() / "model" / "aliengo.cfg"); }

RobotState stance_state(const QuadrupedModel& model, const Pose& base_on_ground) {
  RobotState s;
  s.base = base_on_ground;
  s.base.position.z() = base_on_ground.position.z() + model.stance_height();
  s.q = model.stance;
  s.prev_action = model.stance;
  s.gravity_body = s.base.orientation.conjugate().rotate(Vec3(0.0, 0.0, -9.81));
  return s;
}

Vec3 toe_position_body(const QuadrupedModel& model, const JointVector& q, Leg leg) {
  const auto& mount = model.mount[static_cast<std::size_t>(leg_index(leg))];
  return transform_point(mount, leg_chain(model, model.leg_q(q, leg), QuadrupedModel::side(leg)));
}

Vec3 toe_direction_body(const QuadrupedModel& model, const JointVector& q, Leg leg) {
  const LegJoints j = model.leg_q(q, leg);
  const double a = j[1] + j[2];
  const double c = std::cos(j[0]);
  const double s = std::sin(j[0]);
  // Rx(q0) * (sin a, 0, cos a)
  const Vec3 local(std::sin(a), -s * std::cos(a), c * std::cos(a));
  return transform_vector(model.mount[static_cast<std::size_t>(leg_index(leg))], local);
}

Quat toe_orientation_from_direction(const Vec3& direction) {
  return Quat::from_two_vectors(Vec3::UnitZ(), direction);
}

std::array<Pose, kNumLegs> forward_kinematics(const QuadrupedModel& model, const JointVector& q,
                                              const Pose& base) {
  std::array<Pose, kNumLegs> out;
  for (int l = 0; l < kNumLegs; ++l) {
    const Leg leg = static_cast<Leg>(l);
    // Twist about the shank is fixed in the body frame, so the pose is
    // equivariant in the base.
    const Pose local{toe_position_body(model, q, leg),
                     toe_orientation_from_direction(toe_direction_body(model, q, leg))};
    out[static_cast<std::size_t>(l)] = compose(base, local);
  }
  return out;
}

Mat3 jacobian(const QuadrupedModel& model, const JointVector& q, Leg leg) {
  const LegJoints j = model.leg_q(q, leg);
  const double side = QuadrupedModel::side(leg);
  const double s1 = std::sin(j[1]), c1 = std::cos(j[1]);
  const double s12 = std::sin(j[1] + j[2]), c12 = std::cos(j[1] + j[2]);
  const double c0 = std::cos(j[0]), s0 = std::sin(j[0]);
  const double z = -model.thigh * c1 - model.shank * c12;
  const double y = side * model.hip_offset;
  // Planar partials before abduction.
  const double dx1 = -model.thigh * c1 - model.shank * c12;
  const double dz1 = model.thigh * s1 + model.shank * s12;
  const double dx2 = -model.shank * c12;
  const double dz2 = model.shank * s12;

  Mat3 jl;
  // Column 0: abduction rotates (y, z) about x.
  jl(0, 0) = 0.0;
  jl(1, 0) = -s0 * y - c0 * z;
  jl(2, 0) = c0 * y - s0 * z;
  jl(0, 1) = dx1;
  jl(1, 1) = -s0 * dz1;
  jl(2, 1) = c0 * dz1;
  jl(0, 2) = dx2;
  jl(1, 2) = -s0 * dz2;
  jl(2, 2) = c0 * dz2;
  return model.mount[static_cast<std::size_t>(leg_index(leg))].orientation.matrix() * jl;
}

Mat3 direction_jacobian(const QuadrupedModel& model, const JointVector& q, Leg leg) {
  const LegJoints j = model.leg_q(q, leg);
  const double a = j[1] + j[2];
  const double c0 = std::cos(j[0]), s0 = std::sin(j[0]);
  const double sa = std::sin(a), ca = std::cos(a);
  Mat3 jl;
  jl(0, 0) = 0.0;
  jl(1, 0) = -c0 * ca;
  jl(2, 0) = -s0 * ca;
  jl(0, 1) = ca;
  jl(1, 1) = s0 * sa;
  jl(2, 1) = -c0 * sa;
  jl.col(2) = jl.col(1);
  return model.mount[static_cast<std::size_t>(leg_index(leg))].orientation.matrix() * jl;
}

bool in_workspace(const QuadrupedModel& model, const Pose& base, Leg leg,
                  const Vec3& point_world) {
  const Pose hip = compose(base, model.mount[static_cast<std::size_t>(leg_index(leg))]);
  const Vec3 local = transform_point(invert(hip), point_world);
  const double d2 = local.squaredNorm();
  const double h2 = model.hip_offset * model.hip_offset;
  if (d2 < h2) return false;
  const double r = std::sqrt(d2 - h2);
  return r > 0.05 * model.reach() && r < 0.98 * model.reach();
}

JointVector clamp_limits(const QuadrupedModel& model, const JointVector& q) {
  return q.cwiseMax(model.lower).cwiseMin(model.upper);
}

}  // namespace pedi
