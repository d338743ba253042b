#include "pedi/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pedi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 unit_sphere(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const Vec3 v(n(rng), n(rng), n(rng));
    const double len = v.norm();
    if (len > 1e-12) return v / len;
  }
}

Vec3 sample_box(const Box& b, std::mt19937_64& rng) {
  const Vec3& h = b.half_extents;
  const double ax = h.y() * h.z(), ay = h.x() * h.z(), az = h.x() * h.y();
  const double u = uniform(rng, 0.0, ax + ay + az);
  const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
  const double a = uniform(rng, -1.0, 1.0), c = uniform(rng, -1.0, 1.0);
  if (u < ax) return {sign * h.x(), a * h.y(), c * h.z()};
  if (u < ax + ay) return {a * h.x(), sign * h.y(), c * h.z()};
  return {a * h.x(), c * h.y(), sign * h.z()};
}

Vec3 sample_cylinder(const Cylinder& c, std::mt19937_64& rng) {
  const double side = 2.0 * M_PI * c.radius * 2.0 * c.half_height;
  const double cap = M_PI * c.radius * c.radius;
  const double pick = uniform(rng, 0.0, side + 2.0 * cap);
  const double phi = uniform(rng, 0.0, 2.0 * M_PI);
  if (pick < side) {
    return {c.radius * std::cos(phi), c.radius * std::sin(phi),
            uniform(rng, -c.half_height, c.half_height)};
  }
  const double r = c.radius * std::sqrt(uniform(rng, 0.0, 1.0));
  const double z = pick < side + cap ? c.half_height : -c.half_height;
  return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace

void validate_shape(const Shape& s) {
  const bool ok = std::visit(overloaded{
                                 [](const Box& b) { return (b.half_extents.array() > 0.0).all(); },
                                 [](const Cylinder& c) { return c.radius > 0.0 && c.half_height > 0.0; },
                                 [](const Sphere& sp) { return sp.radius > 0.0; },
                                 [](const Hemisphere& h) { return h.radius > 0.0; },
                             },
                             s);
  if (!ok) throw std::invalid_argument(std::string("shape: ") + shape_name(s) + " needs positive dimensions");
}

double surface_area(const Shape& s) {
  return std::visit(overloaded{
                        [](const Box& b) {
                          const Vec3& h = b.half_extents;
                          return 8.0 * (h.x() * h.y() + h.y() * h.z() + h.x() * h.z());
                        },
                        [](const Cylinder& c) {
                          return 2.0 * M_PI * c.radius * (2.0 * c.half_height + c.radius);
                        },
                        [](const Sphere& sp) { return 4.0 * M_PI * sp.radius * sp.radius; },
                        [](const Hemisphere& h) { return 2.0 * M_PI * h.radius * h.radius; },
                    },
                    s);
}

Vec3 sample_surface(const Shape& s, std::mt19937_64& rng) {
  return std::visit(overloaded{
                        [&](const Box& b) { return sample_box(b, rng); },
                        [&](const Cylinder& c) { return sample_cylinder(c, rng); },
                        [&](const Sphere& sp) -> Vec3 { return sp.radius * unit_sphere(rng); },
                        [&](const Hemisphere& h) -> Vec3 {
                          Vec3 v = unit_sphere(rng);
                          v.z() = std::abs(v.z());
                          return h.radius * v;
                        },
                    },
                    s);
}

double surface_distance(const Shape& s, const Vec3& p) {
  return std::visit(overloaded{
                        [&](const Box& b) {
                          const Vec3 q = p.cwiseAbs() - b.half_extents;
                          const double outside = q.cwiseMax(0.0).norm();
                          const double inside = std::min(q.maxCoeff(), 0.0);
                          return std::abs(outside + inside);
                        },
                        [&](const Cylinder& c) {
                          const double dr = std::hypot(p.x(), p.y()) - c.radius;
                          const double dz = std::abs(p.z()) - c.half_height;
                          const double outside = std::hypot(std::max(dr, 0.0), std::max(dz, 0.0));
                          const double inside = std::min(std::max(dr, dz), 0.0);
                          return std::abs(outside + inside);
                        },
                        [&](const Sphere& sp) { return std::abs(p.norm() - sp.radius); },
                        [&](const Hemisphere& h) {
                          if (p.z() >= 0.0) return std::abs(p.norm() - h.radius);
                          return std::hypot(std::hypot(p.x(), p.y()) - h.radius, p.z());
                        },
                    },
                    s);
}

const char* shape_name(const Shape& s) {
  static constexpr const char* names[] = {"box", "cylinder", "sphere", "hemisphere"};
  return names[s.index()];
}

void SceneObject::validate() const {
  if (parts.empty()) throw std::invalid_argument("object '" + name + "' has no parts");
  for (const Part& p : parts) validate_shape(p.shape);
  if (!(interaction_radius > 0.0)) {
    throw std::invalid_argument("object '" + name + "': interaction radius must be > 0");
  }
}

std::string SceneObject::shape_label() const {
  return parts.size() == 1 ? shape_name(parts.front().shape) : "composite";
}

Pose SceneObject::link_pose() const {
  if (const auto* h = std::get_if<Hinge>(&articulation)) {
    const Quat r = Quat::from_axis_angle(h->axis, h->angle);
    return Pose{h->pivot - r.rotate(h->pivot), r};
  }
  if (const auto* s = std::get_if<Slider>(&articulation)) {
    Vec3 t = s->offset * s->axis.normalized();
    if (s->drop_at && s->offset >= *s->drop_at) t.z() -= s->drop_height;
    return Pose{t, Quat()};
  }
  return Pose::identity();
}

Pose SceneObject::part_pose_world(const Part& part) const {
  return part.on_link ? compose(pose, compose(link_pose(), part.local)) : compose(pose, part.local);
}

Vec3 SceneObject::handle_world() const { return transform_point(compose(pose, link_pose()), handle); }

double SceneObject::joint_coordinate() const {
  if (const auto* h = std::get_if<Hinge>(&articulation)) return h->angle;
  if (const auto* s = std::get_if<Slider>(&articulation)) return s->offset;
  return 0.0;
}

Vec3 SceneObject::centroid_world() const {
  Vec3 sum = Vec3::Zero();
  double area = 0.0;
  for (const Part& p : parts) {
    const double a = surface_area(p.shape);
    sum += a * part_pose_world(p).position;
    area += a;
  }
  return sum / area;
}

namespace {

double restrict_drive(Drive d, double delta) {
  switch (d) {
    case Drive::positive: return std::max(delta, 0.0);
    case Drive::negative: return std::min(delta, 0.0);
    case Drive::both: break;
  }
  return delta;
}

bool inside_box(const Pose& box, const Vec3& half, const Vec3& p) {
  const Vec3 local = transform_point(invert(box), p);
  return (local.cwiseAbs().array() <= half.array()).all();
}

}  // namespace

void advance_articulation(SceneObject& obj, const ContactInput& in) {
  const Vec3 handle = obj.handle_world();
  const bool near = (in.toe - handle).norm() < obj.interaction_radius;

  if (auto* h = std::get_if<Hinge>(&obj.articulation)) {
    if (!near) return;
    obj.touched = true;
    const Vec3 axis = obj.pose.orientation.rotate(h->axis.normalized());
    const Vec3 pivot = transform_point(obj.pose, h->pivot);
    const Vec3 rel = handle - pivot;
    const Vec3 lever_vec = rel - axis * axis.dot(rel);
    const double lever = lever_vec.norm();
    if (lever < 1e-6) return;
    const Vec3 tangent = axis.cross(lever_vec) / lever;
    const double delta = restrict_drive(obj.drive, obj.gain * tangent.dot(in.toe - handle) / lever);
    h->angle = std::clamp(h->angle + delta, h->lo, h->hi);
  } else if (auto* s = std::get_if<Slider>(&obj.articulation)) {
    if (!near) return;
    obj.touched = true;
    const Vec3 axis = obj.pose.orientation.rotate(s->axis.normalized());
    const double delta = restrict_drive(obj.drive, obj.gain * axis.dot(in.toe - handle));
    s->offset = std::clamp(s->offset + delta, s->lo, s->hi);
  } else if (auto* l = std::get_if<Latch>(&obj.articulation)) {
    const double d = (in.toe - handle).norm();
    if (d < l->radius + in.toe_radius) obj.touched = true;
    if (d < l->radius - l->press_depth) l->pressed = true;
  } else if (auto* r = std::get_if<Rolling>(&obj.articulation)) {
    Vec3 n = handle - in.toe;
    n.z() = 0.0;
    const double horizontal = n.norm();
    if ((in.toe - handle).norm() < r->radius + in.toe_radius && horizontal > 1e-9) {
      obj.touched = true;
      n /= horizontal;
      const double vn = in.toe_velocity.dot(n);
      const double kick = r->kick_gain * vn;
      if (vn > 0.0 && kick > r->velocity.dot(n)) r->velocity += (kick - r->velocity.dot(n)) * n;
    }
    const double speed = r->velocity.norm();
    if (speed > 0.0) {
      obj.pose.position += r->velocity * in.dt;
      const double slower = std::max(0.0, speed - r->decel * in.dt);
      r->velocity *= slower / speed;
      if (r->net_pose && inside_box(*r->net_pose, r->net_half_extents, obj.handle_world())) {
        r->velocity.setZero();
      }
    }
  } else if (auto* c = std::get_if<Carry>(&obj.articulation)) {
    if (!c->held && near) {
      c->held = true;
      obj.touched = true;
      c->grab_base_position = in.base_position;
    }
    if (c->held) {
      obj.pose.position = in.toe - obj.pose.orientation.rotate(obj.handle);
      obj.pose.position.z() = std::max(obj.pose.position.z(), 0.0);
      const Vec3 moved = in.base_position - c->grab_base_position;
      c->carried_distance = std::max(c->carried_distance, std::hypot(moved.x(), moved.y()));
    }
  } else if (near) {
    obj.touched = true;
  }
}

}  // namespace pedi
