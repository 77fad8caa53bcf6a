#include "fmarch/frame.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

using namespace fmarch;
using fmarch::testing::expect_vec_near;
using fmarch::testing::random_normal;

namespace {

const double kSqrt2 = std::sqrt(2.0);

void expect_frame_valid(const Frame& f, double tol = 1e-12) {
  // Rows orthonormal and right-handed.
  EXPECT_NEAR(f.u.norm(), 1.0, tol);
  EXPECT_NEAR(f.v.norm(), 1.0, tol);
  EXPECT_NEAR(f.w.norm(), 1.0, tol);
  EXPECT_NEAR(f.u.dot(f.v), 0.0, tol);
  EXPECT_NEAR(f.u.dot(f.w), 0.0, tol);
  EXPECT_NEAR(f.v.dot(f.w), 0.0, tol);
  EXPECT_NEAR(f.det(), 1.0, tol);
  // alpha3 = 0 exactly, beta3 >= 0.
  EXPECT_EQ(f.u.z, 0.0);
  EXPECT_GE(f.v.z, 0.0);
}

TEST(Frame, TiltedWorkedExample) {
  Vec3 n{0.0, -1.0 / kSqrt2, 1.0 / kSqrt2};
  Frame f = build_tilted_frame(n);
  expect_frame_valid(f);
  expect_vec_near(f.u, {1.0, 0.0, 0.0}, 1e-14);
  expect_vec_near(f.v, {0.0, 1.0 / kSqrt2, 1.0 / kSqrt2}, 1e-14);
  expect_vec_near(f.w, n, 0.0);
}

TEST(Frame, TiltedNegativeTimeComponent) {
  Vec3 n{0.0, 1.0 / kSqrt2, -1.0 / kSqrt2};
  Frame f = build_tilted_frame(n);
  expect_frame_valid(f);
  expect_vec_near(f.w, n, 0.0);
  EXPECT_LT(f.w.z, 0.0);  // sign(w3) = sign(n3)
}

TEST(Frame, TiltedRejectsBadInput) {
  EXPECT_THROW(build_tilted_frame({0.0, 0.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(build_tilted_frame({1.0, 0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(build_tilted_frame({0.0, 0.0, 1.0}), std::invalid_argument);
}

TEST(Frame, VerticalAxisExamples) {
  Frame fx = build_vertical_frame({1.0, 0.0, 0.0});
  expect_vec_near(fx.u, {0.0, 1.0, 0.0}, 0.0);
  expect_vec_near(fx.v, {0.0, 0.0, 1.0}, 0.0);
  expect_vec_near(fx.w, {1.0, 0.0, 0.0}, 0.0);
  expect_frame_valid(fx);

  Frame fy = build_vertical_frame({0.0, 1.0, 0.0});
  expect_vec_near(fy.u, {-1.0, 0.0, 0.0}, 0.0);
  expect_vec_near(fy.v, {0.0, 0.0, 1.0}, 0.0);
  expect_vec_near(fy.w, {0.0, 1.0, 0.0}, 0.0);
  EXPECT_GT(fy.v.z, 0.0);

  EXPECT_THROW(build_vertical_frame({0.0, 1.0 / kSqrt2, 1.0 / kSqrt2}),
               std::invalid_argument);
}

// For the front normal of a point moving at speed F, the frame reduces to
// R = (0, 1/sqrt(1+F^2), -F/sqrt(1+F^2)).
TEST(Frame, RHatMatchesSpeedRelation) {
  {
    double F = 2.0;
    Vec3 nu = Vec3{0.6, 0.8, -F} / std::sqrt(1.0 + F * F);
    Frame f = frame_from_normal(nu);
    expect_vec_near(f.r_hat(), {0.0, 1.0 / std::sqrt(5.0), -2.0 / std::sqrt(5.0)},
                    1e-14);
  }
  {
    // F = 0: vertical dispatch, beta3 = 1, gamma3 = 0.
    Vec3 nu{0.6, 0.8, 0.0};
    Frame f = frame_from_normal(nu);
    EXPECT_EQ(f.v.z, 1.0);
    EXPECT_EQ(f.w.z, 0.0);
  }

  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> fdist(-5.0, 5.0);
  std::uniform_real_distribution<double> adist(0.0, 2.0 * M_PI);
  for (int i = 0; i < 1000; ++i) {
    double F = fdist(rng);
    double th = adist(rng);
    double den = std::sqrt(1.0 + F * F);
    Vec3 nu{std::cos(th) / den, std::sin(th) / den, -F / den};
    Frame f = frame_from_normal(nu);
    expect_vec_near(f.r_hat(), {0.0, 1.0 / den, -F / den}, 1e-12);
    EXPECT_GT(f.v.z, 0.0);
  }
}

// The axis-aligned frame u=-x, v=y, w=-t used by the Eikonal reduction can be
// written down directly; frame_from_normal rejects its normal.
TEST(Frame, ManualAxisAlignedFrame) {
  Frame f;
  f.u = {-1.0, 0.0, 0.0};
  f.v = {0.0, 1.0, 0.0};
  f.w = {0.0, 0.0, -1.0};
  EXPECT_NEAR(f.det(), 1.0, 0.0);
  expect_vec_near(f.r_hat(), {0.0, 0.0, -1.0}, 0.0);
  EXPECT_THROW(frame_from_normal({0.0, 0.0, -1.0}), std::invalid_argument);
}

TEST(Frame, CoordinateConversion) {
  Frame f = build_vertical_frame({1.0, 0.0, 0.0});
  expect_vec_near(f.to_local({1.0, 2.0, 3.0}), {2.0, 3.0, 1.0}, 0.0);
  // Basis rows map to unit coordinate vectors.
  expect_vec_near(f.to_local(f.u), {1.0, 0.0, 0.0}, 1e-15);
  expect_vec_near(f.to_local(f.v), {0.0, 1.0, 0.0}, 1e-15);
  expect_vec_near(f.to_local(f.w), {0.0, 0.0, 1.0}, 1e-15);
}

TEST(Frame, RandomizedInvariantsAndRoundTrip) {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    Vec3 n = random_normal(rng);
    Frame f = frame_from_normal(n);
    expect_frame_valid(f);
    expect_vec_near(f.w, n, 1e-12);  // w is the normal the frame was built from

    Vec3 p{coord(rng), coord(rng), coord(rng)};
    expect_vec_near(f.to_global(f.to_local(p)), p, 1e-12);
    expect_vec_near(f.to_local(f.to_global(p)), p, 1e-12);
  }
}

}  // namespace
