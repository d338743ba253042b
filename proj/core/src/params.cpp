#include "pedi/params.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pedi/config.hpp"

namespace pedi {

std::string_view to_string(Frame f) {
  switch (f) {
    case Frame::object: return "object";
    case Frame::world: return "world";
    case Frame::body: return "body";
  }
  return "?";
}

Frame frame_from_string(std::string_view s) {
  if (s == "object") return Frame::object;
  if (s == "world") return Frame::world;
  if (s == "body") return Frame::body;
  throw std::invalid_argument("unknown frame '" + std::string(s) + "' (object, world, body)");
}

void TrajectoryParams::validate() const {
  if (flag != kFlagFrontLeft && flag != kFlagFrontRight) {
    throw std::invalid_argument("TrajectoryParams: flag must be 0 or 1");
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw std::invalid_argument("TrajectoryParams: duration must be positive");
  }
  curve.validate();
}

ParamsRecord to_record(const TrajectoryParams& p) {
  ParamsRecord r{};
  std::size_t k = 0;
  r[k++] = p.flag;
  for (const auto& pt : p.curve.points) {
    r[k++] = pt.x();
    r[k++] = pt.y();
    r[k++] = pt.z();
  }
  for (double w : p.curve.weights) r[k++] = w;
  for (double c : p.orientation.start.wxyz()) r[k++] = c;
  for (double c : p.orientation.end.wxyz()) r[k++] = c;
  r[k++] = p.duration;
  r[k++] = static_cast<double>(static_cast<int>(p.frame));
  return r;
}

TrajectoryParams from_record(std::span<const double> r) {
  if (r.size() != kParamsRecordSize) {
    throw std::invalid_argument("from_record: expected 39 values, got " + std::to_string(r.size()));
  }
  TrajectoryParams p;
  std::size_t k = 0;
  p.flag = static_cast<int>(std::lround(r[k++]));
  for (auto& pt : p.curve.points) {
    pt = Vec3(r[k], r[k + 1], r[k + 2]);
    k += 3;
  }
  for (double& w : p.curve.weights) w = r[k++];
  p.orientation.start = Quat(r[k], r[k + 1], r[k + 2], r[k + 3]);
  k += 4;
  p.orientation.end = Quat(r[k], r[k + 1], r[k + 2], r[k + 3]);
  k += 4;
  p.duration = r[k++];
  const int code = static_cast<int>(std::lround(r[k]));
  if (code < 0 || code > 2) throw std::invalid_argument("from_record: bad frame code");
  p.frame = static_cast<Frame>(code);
  p.validate();
  return p;
}

void RandomizationRanges::validate() const {
  const auto check = [](const Interval& i, const char* name) {
    if (!(i.lo <= i.hi)) {
      throw std::invalid_argument(std::string("RandomizationRanges: degenerate interval ") + name);
    }
  };
  check(p_xy, "p_xy");
  check(p_z, "p_z");
  check(w, "w");
  check(ori_phi_psi, "ori_phi_psi");
  check(ori_cos_theta, "ori_cos_theta");
  if (!(w.lo > 0.0)) throw std::invalid_argument("RandomizationRanges: weights must be positive");
  if (ori_cos_theta.lo < -1.0 || ori_cos_theta.hi > 1.0) {
    throw std::invalid_argument("RandomizationRanges: cos(theta) outside [-1, 1]");
  }
  if (!(duration > 0.0)) throw std::invalid_argument("RandomizationRanges: duration must be > 0");
}

Quat orientation_from_angles(double phi, double cos_theta, double psi) {
  const double theta = std::acos(std::clamp(cos_theta, -1.0, 1.0));
  return Quat::from_axis_angle(Vec3::UnitZ(), psi) * Quat::from_axis_angle(Vec3::UnitY(), theta) *
         Quat::from_axis_angle(Vec3::UnitX(), phi);
}

TrajectoryParams sample_random_params(std::uint64_t seed, const RandomizationRanges& ranges) {
  ranges.validate();
  std::mt19937_64 rng(seed);
  const auto uniform = [&rng](const Interval& i) {
    if (i.lo == i.hi) return i.lo;
    // Closed interval: the upper bound is reachable.
    return std::uniform_real_distribution<double>(i.lo, std::nextafter(i.hi, HUGE_VAL))(rng);
  };
  TrajectoryParams p;
  p.flag = std::bernoulli_distribution(0.5)(rng) ? kFlagFrontRight : kFlagFrontLeft;
  for (auto& pt : p.curve.points) {
    const double x = uniform(ranges.p_xy);
    const double y = uniform(ranges.p_xy);
    const double z = uniform(ranges.p_z);
    pt = Vec3(std::clamp(x, ranges.p_xy.lo, ranges.p_xy.hi),
              std::clamp(y, ranges.p_xy.lo, ranges.p_xy.hi),
              std::clamp(z, ranges.p_z.lo, ranges.p_z.hi));
  }
  for (double& w : p.curve.weights) w = std::clamp(uniform(ranges.w), ranges.w.lo, ranges.w.hi);
  for (Quat* q : {&p.orientation.start, &p.orientation.end}) {
    const double phi = uniform(ranges.ori_phi_psi);
    const double cos_theta = uniform(ranges.ori_cos_theta);
    const double psi = uniform(ranges.ori_phi_psi);
    *q = orientation_from_angles(phi, std::clamp(cos_theta, ranges.ori_cos_theta.lo,
                                                 ranges.ori_cos_theta.hi),
                                 psi);
  }
  p.duration = ranges.duration;
  p.frame = Frame::body;
  return p;
}

namespace {

std::string bound_message(const char* name, double v, const Interval& i) {
  std::ostringstream os;
  os << name << " = " << v << " outside [" << i.lo << ", " << i.hi << "]";
  return os.str();
}

}  // namespace

std::optional<std::string> check_point_in_ranges(const Vec3& p, const RandomizationRanges& r) {
  if (!std::isfinite(p.x()) || !r.p_xy.contains(p.x())) return bound_message("p_x", p.x(), r.p_xy);
  if (!std::isfinite(p.y()) || !r.p_xy.contains(p.y())) return bound_message("p_y", p.y(), r.p_xy);
  if (!std::isfinite(p.z()) || !r.p_z.contains(p.z())) return bound_message("p_z", p.z(), r.p_z);
  return std::nullopt;
}

std::optional<std::string> check_weight_in_ranges(double w, const RandomizationRanges& r) {
  if (!std::isfinite(w) || !r.w.contains(w)) return bound_message("w", w, r.w);
  return std::nullopt;
}

TrajectoryParams transform_params(const TrajectoryParams& p, const Pose& pose) {
  TrajectoryParams out = p;
  for (auto& pt : out.curve.points) pt = transform_point(pose, pt);
  out.orientation.start = pose.orientation * p.orientation.start;
  out.orientation.end = pose.orientation * p.orientation.end;
  return out;
}

TrajectoryParams express_params(const TrajectoryParams& p, const Pose& frame_pose, Frame target) {
  const Frame from = p.frame;
  TrajectoryParams out;
  if ((from == Frame::object || from == Frame::body) && target == Frame::world) {
    out = transform_params(p, frame_pose);
  } else if (from == Frame::world && (target == Frame::object || target == Frame::body)) {
    out = transform_params(p, invert(frame_pose));
  } else {
    throw std::invalid_argument("express_params: unsupported hop " + std::string(to_string(from)) +
                                " -> " + std::string(to_string(target)) + " (go via world)");
  }
  out.frame = target;
  return out;
}

ManipulationCommand build_command(const TrajectoryParams& p, const PhaseClock& clock,
                                  double t_now, double dt) {
  if (p.frame != Frame::body) {
    throw std::invalid_argument("build_command: params must be in the body frame, got " +
                                std::string(to_string(p.frame)));
  }
  const double s = phase(clock, t_now);
  ManipulationCommand cmd;
  cmd.flag = p.flag;
  cmd.desired_point = bezier_eval(p.curve, s);
  const auto ahead = lookahead_points(p.curve, clock, t_now, dt, 3);
  for (std::size_t j = 0; j < 3; ++j) cmd.lookahead[j] = ahead[j];
  cmd.desired_orientation = slerp(p.orientation, s);
  return cmd;
}

namespace {

const std::vector<std::string>& params_keys() {
  static const std::vector<std::string> keys = {"frame", "flag", "duration", "p0", "p1", "p2",
                                                "p3", "p4", "p5", "p6", "weights", "q_start",
                                                "q_end"};
  return keys;
}

Quat quat_from(const KeyValueFile& f, const char* key) {
  const auto v = f.get_doubles(key, 4);
  try {
    return Quat(v[0], v[1], v[2], v[3]);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(f.source(), f.at(key).line, key, e.what());
  }
}

}  // namespace

TrajectoryParams parse_params(std::istream& in, std::string source) {
  const auto f = KeyValueFile::parse(in, std::move(source));
  f.require_known(params_keys());
  TrajectoryParams p;
  try {
    p.frame = frame_from_string(f.get_string("frame"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(f.source(), f.at("frame").line, "frame", e.what());
  }
  p.flag = f.get_int("flag");
  if (p.flag != kFlagFrontLeft && p.flag != kFlagFrontRight) {
    throw ConfigError(f.source(), f.at("flag").line, "flag", "flag must be 0 or 1");
  }
  p.duration = f.get_double("duration");
  if (!(p.duration > 0.0)) {
    throw ConfigError(f.source(), f.at("duration").line, "duration", "must be positive");
  }
  for (int i = 0; i < kControlPoints; ++i) {
    const std::string key = "p" + std::to_string(i);
    const auto v = f.get_doubles(key, 3);
    p.curve.points[static_cast<std::size_t>(i)] = Vec3(v[0], v[1], v[2]);
  }
  const auto w = f.get_doubles("weights", kControlPoints);
  for (int i = 0; i < kControlPoints; ++i) {
    if (!(w[static_cast<std::size_t>(i)] > 0.0)) {
      throw ConfigError(f.source(), f.at("weights").line, "weights",
                        "weight " + std::to_string(i) + " must be positive");
    }
    p.curve.weights[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)];
  }
  p.orientation.start = quat_from(f, "q_start");
  p.orientation.end = quat_from(f, "q_end");
  return p;
}

TrajectoryParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "", "cannot open file");
  return parse_params(in, path.string());
}

void write_params(std::ostream& out, const TrajectoryParams& p) {
  const auto old_prec = out.precision(17);
  out << "frame = " << to_string(p.frame) << "\n";
  out << "flag = " << p.flag << "\n";
  out << "duration = " << p.duration << "\n";
  for (int i = 0; i < kControlPoints; ++i) {
    const auto& pt = p.curve.points[static_cast<std::size_t>(i)];
    out << "p" << i << " = " << pt.x() << " " << pt.y() << " " << pt.z() << "\n";
  }
  out << "weights =";
  for (double w : p.curve.weights) out << " " << w;
  out << "\n";
  for (const auto& [key, q] : {std::pair{"q_start", p.orientation.start},
                               std::pair{"q_end", p.orientation.end}}) {
    out << key << " =";
    for (double c : q.wxyz()) out << " " << c;
    out << "\n";
  }
  out.precision(old_prec);
}

}  // namespace pedi
