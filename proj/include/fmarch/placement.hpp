#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "fmarch/frame.hpp"
#include "fmarch/solver.hpp"
#include "fmarch/vec.hpp"

namespace fmarch {

/// Constrained child-placement problem: minimize the squared parent offsets
/// subject to a real solve (V1), causality with margin (V2), and spacetime
/// repulsion from the local accepted subset (E).
struct PlacementProblem {
  Vec3 parent_a;  // uvw coordinates
  Vec3 parent_b;
  double t_a = 0.0;  // global times of the parents
  double t_b = 0.0;
  double speed_at_a = 0.0;  // G(u_a), frozen during the search
  double h = 0.0;           // repulsion parameter
  double dt = 0.0;          // h / sqrt(G^2 + 1)
  Frame frame;
  std::vector<Vec3> neighbors;  // local accepted subset, global xyt coords
  int grid_size = 10;
  int max_refinements = 5;
};

inline double objective(const PlacementProblem& prob, const Vec2& u_d) {
  const Vec2 sa = u_d - Vec2{prob.parent_a.x, prob.parent_a.y};
  const Vec2 sb = u_d - Vec2{prob.parent_b.x, prob.parent_b.y};
  return sa.norm2() + sb.norm2();
}

/// (V1): the direct solve produced a real height on an admissible branch:
/// one solving the unsquared relation and consistent with the local-graph
/// representation (slope of order one, not the steep spurious sheet).
inline bool check_v1(const DirectDiagnostics& d) {
  if (d.degenerate || !d.branch_admissible) return false;
  if (d.gradient_norm > 2.0) return false;
  return d.discriminant >= -d.clamp_tolerance;
}

/// (V2): causality with margin, t_d - max(t_a, t_b) >= dt.
inline bool check_v2(double t_d, double t_a, double t_b, double dt) {
  return t_d - std::max(t_a, t_b) >= dt - 1e-14;
}

/// (E): full spacetime distance to every tracked accepted point >= h.
inline bool check_e(const Vec3& p_global, std::span<const Vec3> neighbors,
                    double h) {
  for (const Vec3& q : neighbors) {
    if (dist(p_global, q) < h - 1e-14) return false;
  }
  return true;
}

struct PlacementResult {
  Vec2 child_uv;
  double w_direct = 0.0;
  double objective_value = 0.0;
  int refinements = 0;
  std::vector<double> objective_history;  // best f per grid level
  // Diagnostic counters over all evaluated grid nodes.
  long nodes_evaluated = 0;
  long v2_pass_e_fail = 0;
};

/// Grid method: successively refined s-by-s grids, meshsize starting at h/2
/// and halving after each level. The first grid is centered at the
/// unconstrained-subproblem solution (u_min, v_a + h). Feasible nodes are
/// scored with the objective; ties break to the lowest row-major node index.
/// Stops when the best objective stabilizes to 1e-15 or after
/// max_refinements levels; returns nothing when no feasible node was found
/// on any level.
inline std::optional<PlacementResult> grid_search(const PlacementProblem& prob) {
  const Vec3 r_hat = prob.frame.r_hat();
  const int s = prob.grid_size;
  double mesh = prob.h / 2.0;
  Vec2 center{(prob.parent_a.x + prob.parent_b.x) / 2.0, prob.parent_a.y + prob.h};

  PlacementResult out;
  bool found = false;
  double f_prev = 1e6;
  for (int level = 1; level <= prob.max_refinements; ++level) {
    double f_best = std::numeric_limits<double>::infinity();
    Vec2 best_uv;
    double best_w = 0.0;
    for (int row = 0; row < s; ++row) {
      for (int col = 0; col < s; ++col) {
        const Vec2 uv{center.x + (col - (s - 1) * 0.5) * mesh,
                      center.y + (row - (s - 1) * 0.5) * mesh};
        ++out.nodes_evaluated;
        auto st = build_stencil(prob.parent_a, prob.parent_b, uv);
        if (!st) continue;
        auto direct = direct_solve(*st, prob.speed_at_a, r_hat);
        if (!check_v1(direct.diag) || !direct.w) continue;
        const Vec3 local{uv.x, uv.y, *direct.w};
        const double t_d = r_hat.dot(local);
        const bool v2 = check_v2(t_d, prob.t_a, prob.t_b, prob.dt);
        if (!v2) continue;
        const bool e_ok = check_e(prob.frame.to_global(local), prob.neighbors, prob.h);
        if (!e_ok) {
          ++out.v2_pass_e_fail;
          continue;
        }
        const double f = objective(prob, uv);
        if (f < f_best) {
          f_best = f;
          best_uv = uv;
          best_w = *direct.w;
        }
      }
    }

    if (!std::isfinite(f_best)) break;  // no feasible node at this level
    found = true;
    out.child_uv = best_uv;
    out.w_direct = best_w;
    out.objective_value = f_best;
    out.refinements = level;
    out.objective_history.push_back(f_best);

    const double q = std::abs(f_best - f_prev);
    f_prev = f_best;
    center = best_uv;
    mesh /= 2.0;
    if (q <= 1e-15) break;
  }

  if (!found) return std::nullopt;
  return out;
}

}  // namespace fmarch
