#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "pedi/scene.hpp"

using namespace pedi;

TEST_CASE("surface samples lie on the surface") {
  const Shape shapes[] = {Box{Vec3(0.3, 0.1, 0.2)}, Cylinder{0.2, 0.4}, Sphere{0.11}, Hemisphere{0.05}};
  std::mt19937_64 rng(51);
  for (const Shape& s : shapes) {
    for (int i = 0; i < 2000; ++i) {
      const Vec3 p = sample_surface(s, rng);
      CHECK_MESSAGE(surface_distance(s, p) < 1e-12, shape_name(s));
    }
  }
}

TEST_CASE("hemisphere samples cover the dome only") {
  std::mt19937_64 rng(52);
  const Hemisphere h{0.05};
  for (int i = 0; i < 1000; ++i) CHECK(sample_surface(h, rng).z() >= 0.0);
  CHECK(surface_area(h) == doctest::Approx(2.0 * M_PI * 0.05 * 0.05));
}

TEST_CASE("box samples are area weighted across faces") {
  // A flat box: the two large faces carry nearly all the area.
  const Box b{Vec3(1.0, 1.0, 0.01)};
  std::mt19937_64 rng(53);
  int top_bottom = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    if (std::abs(std::abs(sample_surface(b, rng).z()) - 0.01) < 1e-12) ++top_bottom;
  }
  const double expected = 1.0 / (1.0 + 0.01 + 0.01);
  CHECK(static_cast<double>(top_bottom) / n == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("surface distance of simple points") {
  CHECK(surface_distance(Box{Vec3(1, 1, 1)}, Vec3(0, 0, 0)) == doctest::Approx(1.0));
  CHECK(surface_distance(Box{Vec3(1, 1, 1)}, Vec3(3, 0, 0)) == doctest::Approx(2.0));
  CHECK(surface_distance(Sphere{1.0}, Vec3(0, 0.5, 0)) == doctest::Approx(0.5));
  CHECK(surface_distance(Cylinder{1.0, 1.0}, Vec3(0, 0, 0)) == doctest::Approx(1.0));
  CHECK(surface_distance(Cylinder{1.0, 1.0}, Vec3(2, 0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("shapes need positive dimensions") {
  CHECK_THROWS_AS(validate_shape(Sphere{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate_shape(Box{Vec3(1, -1, 1)}), std::invalid_argument);
  CHECK_NOTHROW(validate_shape(Cylinder{0.1, 0.1}));
  SceneObject empty;
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("hinge drives in its allowed direction only") {
  SceneObject door;
  door.parts.push_back({Box{Vec3(0.02, 0.4, 0.8)}, Pose::identity(), true});
  Hinge h;
  h.pivot = Vec3(0, -0.4, 0);
  h.axis = Vec3::UnitZ();
  door.articulation = h;
  door.handle = Vec3(0, 0.35, 0);
  door.interaction_radius = 0.1;
  door.drive = Drive::positive;
  CHECK(door.shape_label() == "box");

  ContactInput in;
  // Tangent of +z rotation at the handle is -x.
  in.toe = door.handle_world() + Vec3(-0.02, 0, 0);
  advance_articulation(door, in);
  const double opened = door.joint_coordinate();
  CHECK(opened > 0.0);
  CHECK(door.touched);
  in.toe = door.handle_world() + Vec3(0.02, 0, 0);
  advance_articulation(door, in);
  CHECK(door.joint_coordinate() == opened);

  // Links follow the joint; the pivot stays put.
  const Pose link = door.link_pose();
  CHECK((transform_point(link, h.pivot) - h.pivot).norm() < 1e-12);
}

TEST_CASE("hinge stays within limits") {
  SceneObject o;
  o.parts.push_back({Box{}, Pose::identity(), true});
  Hinge h;
  h.hi = 0.3;
  o.articulation = h;
  o.handle = Vec3(1, 0, 0);
  o.interaction_radius = 10.0;
  ContactInput in;
  for (int i = 0; i < 50; ++i) {
    in.toe = o.handle_world() + Vec3(0, 0.5, 0);
    advance_articulation(o, in);
  }
  CHECK(o.joint_coordinate() == doctest::Approx(0.3));
}

TEST_CASE("slider drops past its edge") {
  SceneObject o;
  o.parts.push_back({Box{Vec3(0.05, 0.05, 0.05)}, Pose::identity(), true});
  Slider s;
  s.axis = Vec3::UnitX();
  s.drop_at = 0.3;
  s.drop_height = 0.5;
  o.articulation = s;
  o.interaction_radius = 0.2;
  ContactInput in;
  for (int i = 0; i < 40; ++i) {
    in.toe = o.handle_world() + Vec3(0.05, 0, 0);
    advance_articulation(o, in);
  }
  CHECK(o.joint_coordinate() >= 0.3);
  CHECK(o.link_pose().position.z() == doctest::Approx(-0.5));
}

TEST_CASE("latch needs the toe inside the dome") {
  SceneObject b;
  b.parts.push_back({Hemisphere{0.05}, Pose::identity(), false});
  Latch l;
  l.radius = 0.05;
  l.press_depth = 0.02;
  b.articulation = l;
  ContactInput in;
  in.toe = Vec3(0, 0, 0.06);
  advance_articulation(b, in);
  CHECK(b.touched);
  CHECK_FALSE(std::get<Latch>(b.articulation).pressed);
  in.toe = Vec3(0, 0, 0.025);
  advance_articulation(b, in);
  CHECK(std::get<Latch>(b.articulation).pressed);
}

TEST_CASE("kicked ball rolls, slows and stops in the net") {
  SceneObject ball;
  Rolling r;
  r.radius = 0.1;
  r.decel = 0.5;
  r.net_pose = Pose{Vec3(1.0, 0, 0.2), Quat()};
  r.net_half_extents = Vec3(0.2, 0.5, 0.2);
  ball.articulation = r;
  ball.handle = Vec3(0, 0, 0.1);
  ball.parts.push_back({Sphere{0.1}, Pose{Vec3(0, 0, 0.1), Quat()}, false});
  ContactInput in;
  in.toe = Vec3(-0.11, 0, 0.1);
  in.toe_velocity = Vec3(1.0, 0, 0);
  advance_articulation(ball, in);
  CHECK(ball.touched);
  const double v0 = std::get<Rolling>(ball.articulation).velocity.x();
  // Kicked to 2 m/s, then one tick of rolling friction.
  CHECK(v0 == doctest::Approx(2.0 - 0.5 * 0.02));
  in.toe = Vec3(-5, 0, 0);
  for (int i = 0; i < 200; ++i) advance_articulation(ball, in);
  const auto& after = std::get<Rolling>(ball.articulation);
  CHECK(after.velocity.norm() == 0.0);
  CHECK(ball.pose.position.x() >= 0.8);
  CHECK(ball.pose.position.x() <= 1.2);
}

TEST_CASE("carried object follows the toe") {
  SceneObject basket;
  basket.parts.push_back({Box{Vec3(0.1, 0.1, 0.1)}, Pose::identity(), false});
  basket.articulation = Carry{};
  basket.handle = Vec3(0, 0, 0.2);
  basket.interaction_radius = 0.05;
  ContactInput in;
  in.toe = Vec3(0, 0, 0.21);
  advance_articulation(basket, in);
  CHECK(std::get<Carry>(basket.articulation).held);
  in.toe = Vec3(0.5, 0.2, 0.6);
  in.base_position = Vec3(0.3, 0.4, 0.0);
  advance_articulation(basket, in);
  CHECK((basket.handle_world() - in.toe).norm() < 1e-12);
  CHECK(std::get<Carry>(basket.articulation).carried_distance == doctest::Approx(0.5));
}

TEST_CASE("composite objects and centroids") {
  SceneObject o;
  o.pose = Pose{Vec3(1, 2, 0), Quat()};
  o.parts.push_back({Sphere{0.1}, Pose{Vec3(0.5, 0, 0), Quat()}, false});
  o.parts.push_back({Sphere{0.1}, Pose{Vec3(-0.5, 0, 0), Quat()}, false});
  CHECK(o.shape_label() == "composite");
  CHECK((o.centroid_world() - Vec3(1, 2, 0)).norm() < 1e-12);
}
