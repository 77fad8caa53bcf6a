#pragma once

#include <gtest/gtest.h>

#include <random>

#include "fmarch/vec.hpp"

namespace fmarch::testing {

inline void expect_vec_near(const Vec3& got, const Vec3& want, double tol) {
  EXPECT_NEAR(got.x, want.x, tol);
  EXPECT_NEAR(got.y, want.y, tol);
  EXPECT_NEAR(got.z, want.z, tol);
}

/// Random unit spacetime normal with |n3| < cap.
inline Vec3 random_normal(std::mt19937_64& rng, double n3_cap = 0.99) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> nz(-n3_cap, n3_cap);
  double n3 = nz(rng);
  double s = std::sqrt(1.0 - n3 * n3);
  double th = angle(rng);
  return {s * std::cos(th), s * std::sin(th), n3};
}

}  // namespace fmarch::testing
