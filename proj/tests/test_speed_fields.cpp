#include "fmarch/speed_fields.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

using namespace fmarch;
using fmarch::testing::expect_vec_near;

namespace {

TEST(SpeedFields, RegistryKnowsAllSixExamples) {
  for (auto name : field_names()) {
    auto f = make_field(name);
    EXPECT_EQ(f->name(), name);
  }
  EXPECT_THROW(make_field("nope"), std::invalid_argument);
}

TEST(SpeedFields, PointwiseSpeedValues) {
  EXPECT_EQ(make_field("expanding")->speed(0.3, -0.7, 0.2), 1.0);
  EXPECT_NEAR(make_field("football")->speed(0.0, 0.0, 0.1), 0.0, 1e-15);
  EXPECT_NEAR(make_field("oscillating")->speed(0.1, 0.1, 0.0),
              0.7 * std::sin(3.0), 1e-15);
  EXPECT_THROW(make_field("rose")->speed(0.0, 0.0, 0.1), std::domain_error);
}

TEST(SpeedFields, ExactSolutionValues) {
  EXPECT_NEAR(make_field("expanding")->phi(0.5, 0.0, 0.25), 0.0, 1e-15);
  EXPECT_NEAR(make_field("rose")->phi(0.25, 0.0, 0.0), 0.0, 1e-15);

  // The two circles touch when r0 + t - t^2 = 0.5.
  TwoCirclesField two;
  const double t_merge = (1.0 - std::sqrt(0.4)) / 2.0;
  EXPECT_NEAR(t_merge, 0.18377223398316206, 1e-15);
  EXPECT_NEAR(two.radius(t_merge), 0.5, 1e-14);
  EXPECT_THROW(two.phi(0.1, 0.1, 0.6), std::domain_error);
}

TEST(SpeedFields, InitialFrontExpandingCircle) {
  auto field = make_field("expanding");
  FrontSample s = field->initial_front(4);
  ASSERT_EQ(s.points.size(), 4u);
  ASSERT_EQ(s.components.size(), 1u);
  const double r0 = 0.25;
  for (int k = 0; k < 4; ++k) {
    const double th = 2.0 * M_PI * k / 4;
    expect_vec_near(s.points[k], {r0 * std::cos(th), r0 * std::sin(th), 0.0}, 1e-15);
    expect_vec_near(s.normals[k],
                    {std::cos(th) / std::sqrt(2.0), std::sin(th) / std::sqrt(2.0),
                     -1.0 / std::sqrt(2.0)},
                    1e-15);
  }
  EXPECT_THROW(field->initial_front(2), std::invalid_argument);
}

TEST(SpeedFields, InitialFrontNormals) {
  auto field = make_field("oscillating");
  const double f0 = 0.7 * std::sin(3.0);
  FrontSample s = field->initial_front(8);
  for (size_t k = 0; k < s.points.size(); ++k) {
    const Vec3& p = s.points[k];
    const Vec3& n = s.normals[k];
    EXPECT_NEAR(n.norm(), 1.0, 1e-14);
    // Spatial part radial, time part -F/sqrt(1+F^2).
    const double proj = (n.x * p.x + n.y * p.y) / std::hypot(p.x, p.y);
    EXPECT_NEAR(proj, 1.0 / std::sqrt(1.0 + f0 * f0), 1e-14);
    EXPECT_NEAR(n.z, -f0 / std::sqrt(1.0 + f0 * f0), 1e-14);
  }
  // Where the speed vanishes the normal is purely spatial.
  const double t0 = M_PI / 10.0 - 0.3;
  ASSERT_NEAR(field->speed(0.2, 0.0, t0), 0.0, 1e-15);
  Vec3 n = field->normal(0.2, 0.1, t0);
  EXPECT_NEAR(n.z, 0.0, 1e-15);
  EXPECT_NEAR(n.norm(), 1.0, 1e-14);
}

TEST(SpeedFields, TwoCirclesHasTwoComponents) {
  auto s = make_field("two-circles")->initial_front(80);
  EXPECT_EQ(s.components.size(), 2u);
  EXPECT_EQ(s.points.size(), 160u);
}

TEST(SpeedFields, InitialPointsLieOnZeroLevelSet) {
  for (auto name : field_names()) {
    auto field = make_field(name);
    FrontSample s = field->initial_front(24);
    for (const Vec3& p : s.points)
      EXPECT_NEAR(field->phi_at(p), 0.0, 1e-12) << name;
  }
}

// Central-difference checks of |grad phi| = 1 for the signed-distance
// examples and of the level-set relation phi_t + F |grad phi| = 0.
TEST(SpeedFields, GradientNormAndLseResidual) {
  std::mt19937_64 rng(987);
  std::uniform_real_distribution<double> uang(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> uoff(-0.05, 0.05);
  const double d = 1e-6;
  for (auto name : field_names()) {
    auto field = make_field(name);
    double t_hi = std::min(field->default_final_time(), field->max_valid_time());
    if (name == "football") t_hi = 0.25;  // the front vanishes near t = 0.272
    std::uniform_real_distribution<double> ut(0.01, t_hi - 0.01);
    for (int i = 0; i < 100; ++i) {
      const double t = ut(rng);
      // Random point in a thin annulus around the exact front, clear of the
      // polar origin and of the two-circles kink line.
      auto front = field->exact_front(t, 512);
      const Vec2 base = front[static_cast<size_t>(uang(rng) / (2.0 * M_PI) * 511)];
      const double x = base.x + uoff(rng);
      const double y = base.y + uoff(rng);
      if (name == "two-circles" && std::abs(x) < 0.08) continue;
      if ((name == "rose" || name == "escaping") && std::hypot(x, y) < 0.1) continue;

      const double px = (field->phi(x + d, y, t) - field->phi(x - d, y, t)) / (2 * d);
      const double py = (field->phi(x, y + d, t) - field->phi(x, y - d, t)) / (2 * d);
      const double pt = (field->phi(x, y, t + d) - field->phi(x, y, t - d)) / (2 * d);
      const double gn = std::hypot(px, py);
      if (field->signed_distance()) EXPECT_NEAR(gn, 1.0, 1e-6) << name;
      EXPECT_NEAR(pt + field->speed(x, y, t) * gn, 0.0, 1e-6) << name;
    }
  }
}

TEST(SpeedFields, ExactFrontSamplesLieOnFront) {
  for (auto name : field_names()) {
    auto field = make_field(name);
    const double t = std::min(field->default_report_time(),
                              field->max_valid_time() - 1e-9);
    for (const Vec2& p : field->exact_front(t, 300))
      EXPECT_NEAR(field->phi(p.x, p.y, t), 0.0, 1e-12) << name;
  }
}

}  // namespace
