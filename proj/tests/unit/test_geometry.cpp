#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

using namespace pedi;
using pedi::testing::random_pose;
using pedi::testing::random_quat;
using pedi::testing::random_vec;

TEST_CASE("quaternion constructor normalizes") {
  const Quat q(2.0, 0.0, 0.0, 0.0);
  CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(q.w() == doctest::Approx(1.0));
}

TEST_CASE("rotate agrees with the rotation matrix") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const Quat q = random_quat(rng);
    const Vec3 v = random_vec(rng);
    CHECK((q.rotate(v) - q.matrix() * v).norm() < 1e-12);
    CHECK(std::abs(q.matrix().determinant() - 1.0) < 1e-12);
  }
}

TEST_CASE("axis-angle quarter turn about z") {
  const Quat q = Quat::from_axis_angle(Vec3::UnitZ(), M_PI / 2);
  CHECK((q.rotate(Vec3::UnitX()) - Vec3::UnitY()).norm() < 1e-15);
  CHECK(yaw_of(q) == doctest::Approx(M_PI / 2));
}

TEST_CASE("angle between ignores the double cover") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const Quat a = random_quat(rng);
    const Quat b = random_quat(rng);
    CHECK(quat_angle_between(a, b) == doctest::Approx(quat_angle_between(a, -b)).epsilon(1e-12));
    CHECK(quat_angle_between(a, -a) < 1e-7);
  }
  CHECK(quat_angle_between(Quat(), Quat::from_yaw(0.3)) == doctest::Approx(0.3));
}

TEST_CASE("from_two_vectors handles opposite vectors") {
  const Quat q = Quat::from_two_vectors(Vec3::UnitZ(), -Vec3::UnitZ());
  CHECK((q.rotate(Vec3::UnitZ()) + Vec3::UnitZ()).norm() < 1e-12);
  const Quat r = Quat::from_two_vectors(Vec3(1, 2, 3).normalized(), Vec3(-2, 0.5, 1).normalized());
  CHECK((r.rotate(Vec3(1, 2, 3).normalized()) - Vec3(-2, 0.5, 1).normalized()).norm() < 1e-12);
}

TEST_CASE("from_matrix inverts matrix") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Quat q = random_quat(rng);
    CHECK(quat_angle_between(Quat::from_matrix(q.matrix()), q) < 1e-7);
  }
}

TEST_CASE("pose composition acts on points in order") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    const Vec3 p = random_vec(rng);
    CHECK((transform_point(compose(a, b), p) - transform_point(a, transform_point(b, p))).norm() < 1e-9);
    CHECK((transform_point(invert(a), transform_point(a, p)) - p).norm() < 1e-9);
    const Pose id = compose(a, invert(a));
    CHECK(id.position.norm() < 1e-9);
    CHECK(quat_angle_between(id.orientation, Quat()) < 1e-7);
  }
}

TEST_CASE("transform_vector ignores translation") {
  const Pose p{Vec3(5, 6, 7), Quat::from_yaw(M_PI)};
  CHECK((transform_vector(p, Vec3::UnitX()) + Vec3::UnitX()).norm() < 1e-12);
}
