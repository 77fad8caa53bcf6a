#include "fmarch/placement.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "fmarch/frame.hpp"

using namespace fmarch;

namespace {

TEST(Objective, Basics) {
  PlacementProblem prob;
  prob.parent_a = {0.0, 0.0, 0.0};
  prob.parent_b = {1.0, 0.0, 0.0};
  EXPECT_EQ(objective(prob, {0.0, 0.0}), 1.0);
  EXPECT_NEAR(objective(prob, {0.5, 0.0}), 0.5, 1e-15);

  prob.parent_b = prob.parent_a;
  EXPECT_EQ(objective(prob, {0.0, 0.0}), 0.0);

  // The unconstrained minimizer is the parent midpoint.
  prob.parent_a = {0.2, -0.1, 0.0};
  prob.parent_b = {0.6, 0.5, 0.0};
  const Vec2 mid{0.4, 0.2};
  const double f_mid = objective(prob, mid);
  for (double dx : {-1e-3, 1e-3}) {
    EXPECT_GT(objective(prob, {mid.x + dx, mid.y}), f_mid);
    EXPECT_GT(objective(prob, {mid.x, mid.y + dx}), f_mid);
  }
}

TEST(CheckV1, DiscriminantThresholds) {
  DirectDiagnostics d;
  d.discriminant = 100.0;
  EXPECT_TRUE(check_v1(d));
  d.discriminant = -1e-3;
  EXPECT_FALSE(check_v1(d));
  d.discriminant = -1e-13;  // inside the clamp band
  EXPECT_TRUE(check_v1(d));
  d.discriminant = 1.0;
  d.degenerate = true;
  EXPECT_FALSE(check_v1(d));
}

TEST(CheckV2, CausalityMargin) {
  // G = 0 gives dt = h.
  EXPECT_TRUE(check_v2(0.2, 0.0, 0.0, 0.1));
  // G = sqrt(3), h = 0.1 gives dt = 0.05.
  const double dt = 0.1 / std::sqrt(3.0 + 1.0);
  EXPECT_NEAR(dt, 0.05, 1e-15);
  EXPECT_TRUE(check_v2(0.05, 0.0, 0.0, dt));
  EXPECT_FALSE(check_v2(0.0 + dt / 2.0, 0.0, 0.0, dt));
}

TEST(CheckE, RepulsionDistance) {
  const double h = 0.1;
  std::vector<Vec3> nb{{0.0, 0.0, 0.0}, {0.1, 0.0, 0.0}};
  EXPECT_TRUE(check_e({0.0, 0.0, 2.0 * h}, nb, h));
  EXPECT_FALSE(check_e({0.1, 0.0, 0.0}, nb, h));
  EXPECT_TRUE(check_e({0.0, 0.0, h}, nb, h));  // boundary counts as feasible
}

// Flat static front (F = 0): the constrained optimum of the subproblem is
// (u_min, v_a + h) and the grid search should approach it.
TEST(GridSearch, TangentPlaneSolution) {
  const double h = 0.05;
  PlacementProblem prob;
  prob.frame = build_vertical_frame({1.0, 0.0, 0.0});
  prob.parent_a = {0.0, 0.0, 0.0};
  prob.parent_b = {0.8 * h, 0.0, 0.0};
  prob.t_a = prob.t_b = 0.0;
  prob.speed_at_a = 0.0;
  prob.h = h;
  prob.dt = h;
  prob.neighbors = {prob.frame.to_global(prob.parent_a),
                    prob.frame.to_global(prob.parent_b)};

  auto res = grid_search(prob);
  ASSERT_TRUE(res.has_value());
  EXPECT_NEAR(res->child_uv.x, 0.4 * h, h / 8.0);
  EXPECT_NEAR(res->child_uv.y, h, h / 8.0);

  // Returned location passes all three constraints when re-verified.
  auto st = build_stencil(prob.parent_a, prob.parent_b, res->child_uv);
  ASSERT_TRUE(st.has_value());
  auto direct = direct_solve(*st, prob.speed_at_a, prob.frame.r_hat());
  EXPECT_TRUE(check_v1(direct.diag));
  ASSERT_TRUE(direct.w.has_value());
  const Vec3 local{res->child_uv.x, res->child_uv.y, *direct.w};
  EXPECT_TRUE(check_v2(prob.frame.r_hat().dot(local), prob.t_a, prob.t_b, prob.dt));
  EXPECT_TRUE(check_e(prob.frame.to_global(local), prob.neighbors, prob.h));

  // Best objective per level never increases.
  for (size_t i = 1; i < res->objective_history.size(); ++i)
    EXPECT_LE(res->objective_history[i], res->objective_history[i - 1] + 1e-18);
}

TEST(GridSearch, PackedNeighborhoodIsInfeasible) {
  const double h = 0.05;
  PlacementProblem prob;
  prob.frame = build_vertical_frame({1.0, 0.0, 0.0});
  prob.parent_a = {0.0, 0.0, 0.0};
  prob.parent_b = {0.8 * h, 0.0, 0.0};
  prob.speed_at_a = 0.0;
  prob.h = h;
  prob.dt = h;
  // Blanket the reachable neighbourhood with accepted points spaced h/2.
  for (double u = -6.0 * h; u <= 6.0 * h; u += h / 2.0)
    for (double v = -6.0 * h; v <= 6.0 * h; v += h / 2.0)
      prob.neighbors.push_back(prob.frame.to_global({u, v, 0.0}));
  EXPECT_FALSE(grid_search(prob).has_value());
}

// Expanding-circle local patch: compare against an exhaustive fine-grid
// oracle at meshsize h/2^8 over the whole neighbourhood the refinement can
// reach.
TEST(GridSearch, AgreesWithExhaustiveOracle) {
  const double h = 1e-2;
  const double r0 = 0.25;
  const double theta = 0.8 * h / r0;

  // Parents on the cone traced by the unit-speed expanding circle at t = 0.
  const Vec3 pa_g{r0, 0.0, 0.0};
  const Vec3 pb_g{r0 * std::cos(theta), r0 * std::sin(theta), 0.0};
  const Vec3 normal = Vec3{1.0, 0.0, -1.0} / std::sqrt(2.0);

  PlacementProblem prob;
  prob.frame = frame_from_normal(normal);
  prob.parent_a = prob.frame.to_local(pa_g);
  prob.parent_b = prob.frame.to_local(pb_g);
  prob.t_a = prob.t_b = 0.0;
  prob.speed_at_a = 1.0;
  prob.h = h;
  prob.dt = h / std::sqrt(2.0);
  prob.neighbors = {pa_g, pb_g};

  auto res = grid_search(prob);
  ASSERT_TRUE(res.has_value());

  // Exhaustive oracle over the same neighbourhood.
  const Vec2 c0{(prob.parent_a.x + prob.parent_b.x) / 2.0, prob.parent_a.y + h};
  const double span = 4.5 * h;
  const double mesh = h / 256.0;
  const Vec3 r_hat = prob.frame.r_hat();
  double f_oracle = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(2.0 * span / mesh) + 1;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 uv{c0.x - span + i * mesh, c0.y - span + j * mesh};
      auto st = build_stencil(prob.parent_a, prob.parent_b, uv);
      if (!st) continue;
      auto direct = direct_solve(*st, prob.speed_at_a, r_hat);
      if (!check_v1(direct.diag) || !direct.w) continue;
      const Vec3 local{uv.x, uv.y, *direct.w};
      if (!check_v2(r_hat.dot(local), prob.t_a, prob.t_b, prob.dt)) continue;
      if (!check_e(prob.frame.to_global(local), prob.neighbors, prob.h)) continue;
      f_oracle = std::min(f_oracle, objective(prob, uv));
    }
  }
  ASSERT_TRUE(std::isfinite(f_oracle));

  const Vec2 sa = res->child_uv - Vec2{prob.parent_a.x, prob.parent_a.y};
  const Vec2 sb = res->child_uv - Vec2{prob.parent_b.x, prob.parent_b.y};
  const double grad_norm = ((sa + sb) * 2.0).norm();
  const double mesh_final = h / std::pow(2.0, res->refinements);
  EXPECT_LE(std::abs(res->objective_value - f_oracle),
            2.0 * mesh_final * grad_norm);
  EXPECT_GE(res->objective_value, f_oracle - 1e-15);
}

}  // namespace
