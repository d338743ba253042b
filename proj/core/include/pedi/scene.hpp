#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "pedi/geometry.hpp"

namespace pedi {

struct Box {
  Vec3 half_extents = Vec3::Constant(0.5);
};
// Axis along local z, centred on the origin.
struct Cylinder {
  double radius = 0.5;
  double half_height = 0.5;
};
struct Sphere {
  double radius = 0.5;
};
// Dome over the local z = 0 plane; the flat face rests on its support and
// is not part of the visible surface.
struct Hemisphere {
  double radius = 0.5;
};

using Shape = std::variant<Box, Cylinder, Sphere, Hemisphere>;

void validate_shape(const Shape& s);
double surface_area(const Shape& s);
Vec3 sample_surface(const Shape& s, std::mt19937_64& rng);
// Unsigned distance from a local point to the visible surface.
double surface_distance(const Shape& s, const Vec3& p);
const char* shape_name(const Shape& s);

struct Part {
  Shape shape;
  Pose local;            // in the object frame, or the link frame if on_link
  bool on_link = false;  // moves with the articulation
};

// Which way the toe may drive a joint coordinate.
enum class Drive { positive, negative, both };

// Revolute joint in the object frame. Angle in rad.
struct Hinge {
  Vec3 pivot = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;
  double lo = 0.0;
  double hi = M_PI / 2.0;
};

// Prismatic joint in the object frame. Past `drop_at` the link falls by
// `drop_height` (an object slid off a table edge).
struct Slider {
  Vec3 axis = Vec3::UnitX();
  double offset = 0.0;
  double lo = 0.0;
  double hi = 1.0;
  std::optional<double> drop_at;
  double drop_height = 0.0;
};

// Push button; latches once the toe is deeper than press_depth below the dome.
struct Latch {
  double radius = 0.05;
  double press_depth = 0.02;
  bool pressed = false;
};

// Ball kicked by the toe, rolling on the ground with constant deceleration.
// Stops dead inside the optional net box (world frame, axis aligned in the
// net pose).
struct Rolling {
  double radius = 0.11;
  double kick_gain = 2.0;
  double decel = 0.6;     // m/s^2
  Vec3 velocity = Vec3::Zero();
  std::optional<Pose> net_pose;
  Vec3 net_half_extents = Vec3::Zero();
};

// Object picked up when the toe reaches its grip point; follows the toe
// while held.
struct Carry {
  bool held = false;
  Vec3 grab_base_position = Vec3::Zero();
  double carried_distance = 0.0;   // max horizontal base displacement while held
};

using Articulation = std::variant<std::monostate, Hinge, Slider, Latch, Rolling, Carry>;

struct SceneObject {
  int id = 0;
  std::string name;
  Pose pose;
  std::vector<Part> parts;
  Articulation articulation;
  Vec3 handle = Vec3::Zero();      // interaction point, link frame
  double interaction_radius = 0.06;
  Drive drive = Drive::both;
  double gain = 1.0;               // articulation advance per unit penetration
  bool visible = true;
  bool touched = false;

  void validate() const;
  // "composite" when made of several parts.
  std::string shape_label() const;
  // Link pose in the object frame from the articulation state.
  Pose link_pose() const;
  Pose part_pose_world(const Part& part) const;
  Vec3 handle_world() const;
  // Joint coordinate of a hinge or slider; 0 otherwise.
  double joint_coordinate() const;
  // World-frame centroid of the parts (area weighted).
  Vec3 centroid_world() const;
};

struct ContactInput {
  Vec3 toe = Vec3::Zero();           // world
  Vec3 toe_velocity = Vec3::Zero();  // world
  double toe_radius = 0.02;
  Vec3 base_position = Vec3::Zero();
  double dt = 0.02;
};

// Advance one object's articulation for one tick of toe contact and free motion.
void advance_articulation(SceneObject& obj, const ContactInput& in);

}  // namespace pedi
