#pragma once

#include <random>

#include "pedi/geometry.hpp"

namespace pedi::testing {

inline Vec3 random_vec(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

inline Quat random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Quat(n(rng), n(rng), n(rng), n(rng));
}

inline Pose random_pose(std::mt19937_64& rng, double extent = 2.0) {
  return {random_vec(rng, -extent, extent), random_quat(rng)};
}

}  // namespace pedi::testing
