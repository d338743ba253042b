#include <cmath>

#include "doctest.h"
#include "pedi/tasks.hpp"

using namespace pedi;

namespace {

const QuadrupedModel& model() {
  static const QuadrupedModel m = QuadrupedModel::load_default();
  return m;
}

}  // namespace

TEST_CASE("all nine tasks load") {
  CHECK(kTaskNames.size() == 9);
  for (std::string_view name : kTaskNames) {
    const TaskSpec& t = task(name);
    CHECK(t.name == name);
    CHECK(t.expert.frame == Frame::object);
    CHECK_NOTHROW(t.expert.validate());
  }
}

TEST_CASE("unknown task names list the valid ones") {
  try {
    task("press_buton");
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    for (std::string_view name : kTaskNames) CHECK(msg.find(name) != std::string::npos);
  }
}

TEST_CASE("button is a 10 cm hemisphere") {
  const TaskSpec& t = task("press_button");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TaskInstance inst = instantiate(t, seed, model());
    const SceneObject& b = inst.world.object(0);
    REQUIRE(b.parts.size() == 1);
    const auto* h = std::get_if<Hemisphere>(&b.parts[0].shape);
    REQUIRE(h);
    CHECK(2.0 * h->radius == doctest::Approx(0.10));
  }
}

TEST_CASE("valve wheel is 40 cm across on an axis 60 cm up") {
  const TaskSpec& t = task("twist_valve");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TaskInstance inst = instantiate(t, seed, model());
    const SceneObject& v = inst.world.object(0);
    const auto* hinge = std::get_if<Hinge>(&v.articulation);
    REQUIRE(hinge);
    CHECK(transform_point(v.pose, hinge->pivot).z() == doctest::Approx(0.60));
    bool wheel = false;
    for (const Part& p : v.parts) {
      if (const auto* c = std::get_if<Cylinder>(&p.shape)) {
        if (2.0 * c->radius == doctest::Approx(0.40)) {
          wheel = true;
          CHECK(v.part_pose_world(p).position.z() == doctest::Approx(0.60));
          // The wheel's axis is the hinge axis.
          const Vec3 axis = v.part_pose_world(p).orientation.rotate(Vec3::UnitZ());
          CHECK(std::abs(axis.dot(v.pose.orientation.rotate(hinge->axis))) == doctest::Approx(1.0));
        }
      }
    }
    CHECK(wheel);
  }
}

TEST_CASE("placement is seeded and stays in the box") {
  for (std::string_view name : kTaskNames) {
    const TaskSpec& t = task(name);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const TaskInstance a = instantiate(t, seed, model());
      const TaskInstance b = instantiate(t, seed, model());
      REQUIRE(a.object_poses.size() == b.object_poses.size());
      for (std::size_t i = 0; i < a.object_poses.size(); ++i) {
        CHECK(a.object_poses[i].position == b.object_poses[i].position);
        CHECK(a.object_poses[i].orientation.wxyz() == b.object_poses[i].orientation.wxyz());
      }
      const Pose& p = a.object_poses[0];
      CHECK(t.place_x.contains(p.position.x()));
      CHECK(t.place_y.contains(p.position.y()));
      CHECK(t.place_yaw.contains(yaw_of(p.orientation)));
    }
    const Pose p0 = instantiate(t, 1, model()).object_poses[0];
    const Pose p1 = instantiate(t, 2, model()).object_poses[0];
    CHECK(p0.position != p1.position);
  }
}

TEST_CASE("expert template at the identity pose") {
  const TaskSpec& t = task("push_door");
  const TrajectoryParams w = expert_params(t, Pose::identity());
  CHECK(w.frame == Frame::world);
  for (int i = 0; i < kControlPoints; ++i) {
    const auto k = static_cast<std::size_t>(i);
    CHECK((w.curve.points[k] - t.expert.curve.points[k]).norm() < 1e-15);
  }
  CHECK(w.curve.weights == t.expert.curve.weights);
  CHECK(w.duration == t.expert.duration);
}

TEST_CASE("expert template follows a 90 degree yaw") {
  const TaskSpec& t = task("pull_handle");
  const Vec3 origin(1.2, 0.1, 0.0);
  const Pose pose{origin, Quat::from_yaw(M_PI / 2)};
  const TrajectoryParams w = expert_params(t, pose);
  for (int i = 0; i < kControlPoints; ++i) {
    const Vec3& local = t.expert.curve.points[static_cast<std::size_t>(i)];
    const Vec3 expect = origin + Vec3(-local.y(), local.x(), local.z());
    CHECK((w.curve.points[static_cast<std::size_t>(i)] - expect).norm() < 1e-12);
  }
}

TEST_CASE("flag goes to the forelimb on the object's side") {
  const TaskSpec& t = task("press_button");
  CHECK(expert_params(t, Pose{Vec3(1.2, 0.0, 0.0), Quat()}).flag == kFlagFrontRight);
  CHECK(expert_params(t, Pose{Vec3(1.2, 0.1, 0.0), Quat()}).flag == kFlagFrontLeft);
  CHECK(expert_params(t, Pose{Vec3(1.2, -0.1, 0.0), Quat()}).flag == kFlagFrontRight);
  // Lateral offset is measured from the robot.
  const Pose turned{Vec3(0, 0, 0), Quat::from_yaw(M_PI / 2)};
  CHECK(expert_params(t, Pose{Vec3(0.1, 1.2, 0.0), Quat()}, turned).flag == kFlagFrontRight);
}

TEST_CASE("untouched scenes are failures") {
  for (std::string_view name : kTaskNames) {
    const TaskSpec& t = task(name);
    const TaskInstance inst = instantiate(t, 3, model());
    CHECK_FALSE_MESSAGE(success(t, inst.world.objects()), name);
  }
}

TEST_CASE("success needs a complete episode") {
  const TaskSpec& t = task("press_button");
  Episode ep;
  CHECK_THROWS_AS(success(t, ep), std::invalid_argument);
  ep.complete = true;
  ep.fault = "tick 3: boom";
  CHECK_THROWS_AS(success(t, ep), std::invalid_argument);
}

TEST_CASE("opening predicates are monotone in the hinge angle") {
  for (std::string_view name : {"pull_handle", "push_door", "open_dishwasher", "twist_valve"}) {
    const TaskSpec& t = task(name);
    TaskInstance inst = instantiate(t, 0, model());
    std::vector<SceneObject> objects = inst.world.objects();
    auto* h = std::get_if<Hinge>(&objects[0].articulation);
    REQUIRE(h);
    bool seen = false;
    for (int i = 0; i <= 100; ++i) {
      h->angle = h->lo + (h->hi - h->lo) * i / 100.0;
      objects[0].touched = true;
      const bool ok = success(t, objects);
      if (seen) CHECK_MESSAGE(ok, name << " at " << h->angle);
      seen = seen || ok;
    }
    CHECK_MESSAGE(seen, name);
  }
}

TEST_CASE("scripted expert presses the button") {
  const TaskSpec& t = task("press_button");
  ScriptedExpertPlanner planner(t);
  const Episode ep = run_episode(t, planner, ControllerConfig{}, 0);
  REQUIRE(ep.complete);
  CHECK(success(t, ep));
}

TEST_CASE("basket is still lifted after being rolled 1.5 m away") {
  const TaskSpec& t = task("lift_basket");
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    ScriptedExpertPlanner planner(t);
    RunHooks hooks;
    hooks.before_tick = [](World& w, int k) {
      if (k == 60) apply_perturbation(w, 0, Pose{Vec3(1.5, 0, 0), Quat()});
    };
    const Episode ep = run_episode(t, planner, ControllerConfig{}, seed, hooks);
    REQUIRE(ep.complete);
    CHECK_MESSAGE(success(t, ep), "seed " << seed);
  }
}
