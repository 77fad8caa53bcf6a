#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fmarch/vec.hpp"

namespace fmarch {

/// Two-parent finite-difference stencil at a child location in the uv-plane.
/// Encodes the first-order approximation of the surface normal as
/// nu(w_d) = -m_vec*w_d - n_vec, where the third component of nu is always +1.
struct LocalStencil {
  Vec2 child;          // (u_d, v_d)
  Vec2 s_a, s_i;       // child - parent offsets in the uv-plane
  double len_a = 0.0;  // |s_a|
  double len_i = 0.0;  // |s_i|
  double w_a = 0.0;
  double w_i = 0.0;
  double det_b = 0.0;  // determinant of the unit-direction matrix B
  Vec3 m_vec;          // (m_u, m_v, 0)
  Vec3 n_vec;          // (n_u, n_v, -1)

  Vec3 nu_tilde(double w_d) const { return -(m_vec * w_d) - n_vec; }
};

/// Builds the stencil for parents at uvw coordinates and a child uv location.
/// Returns nothing when the parent-to-child directions are colinear or a
/// parent coincides with the child.
inline std::optional<LocalStencil> build_stencil(const Vec3& parent_a,
                                                 const Vec3& parent_i,
                                                 const Vec2& child_uv) {
  LocalStencil st;
  st.child = child_uv;
  st.s_a = child_uv - Vec2{parent_a.x, parent_a.y};
  st.s_i = child_uv - Vec2{parent_i.x, parent_i.y};
  st.len_a = st.s_a.norm();
  st.len_i = st.s_i.norm();
  if (st.len_a == 0.0 || st.len_i == 0.0) return std::nullopt;
  st.w_a = parent_a.z;
  st.w_i = parent_i.z;

  const Vec2 sa_hat = st.s_a / st.len_a;
  const Vec2 si_hat = st.s_i / st.len_i;
  st.det_b = sa_hat.cross(si_hat);  // det of the matrix with rows sa_hat, si_hat
  if (std::abs(st.det_b) < 1e-10) return std::nullopt;

  // (psi_u, psi_v) = B^{-1} (psi_a, psi_i) with psi_k = (w_d - w_k)/|s_k|,
  // split into the parts linear and constant in w_d.
  const double inv_det = 1.0 / st.det_b;
  const double ra = 1.0 / st.len_a;
  const double ri = 1.0 / st.len_i;
  const double mu = inv_det * (si_hat.y * ra - sa_hat.y * ri);
  const double mv = inv_det * (-si_hat.x * ra + sa_hat.x * ri);
  const double nu = -inv_det * (si_hat.y * st.w_a * ra - sa_hat.y * st.w_i * ri);
  const double nv = -inv_det * (-si_hat.x * st.w_a * ra + sa_hat.x * st.w_i * ri);
  st.m_vec = {mu, mv, 0.0};
  st.n_vec = {nu, nv, -1.0};
  return st;
}

/// Unit outward normal of the discretized surface at the child, in frame
/// coordinates. The third component is positive since nu_tilde ends in +1.
inline Vec3 child_normal(const LocalStencil& st, double w_d) {
  return st.nu_tilde(w_d).normalized();
}

/// Quadratic coefficients and feasibility data of the direct solve; the
/// discriminant sign is what constraint feasibility checks inspect.
struct DirectDiagnostics {
  double k1 = 0, k2 = 0, k3 = 0, k4 = 0, k5 = 0, k6 = 0;
  double rho1 = 0, rho2 = 0;
  double g0 = 0;
  double discriminant = 0;     // rho1 + rho2*G0^2, the radicand of the root
  double clamp_tolerance = 1e-12;  // |negative| values below this count as zero
  bool linear_branch = false;
  bool degenerate = false;
  // The quadratic came from squaring the Dirichlet relation; a root of the
  // squared form solves the original one only when nu.R opposes G0 in sign.
  double branch_residual = 0.0;
  bool branch_admissible = true;
  // |grad psi| at the root. The hyperplane representation assumes the
  // surface is locally a graph over the frame plane, so admissible child
  // heights keep this O(h); the squared relation also admits a steep sheet
  // through the parents with a gradient orders of magnitude larger.
  double gradient_norm = 0.0;
};

struct DirectResult {
  std::optional<double> w;
  DirectDiagnostics diag;
};

/// Closed-form solve of the discretized Dirichlet relation with the speed
/// frozen at the first parent. Picks the root with the +G0*sqrt branch; the
/// quadratic degenerates to a linear relation when the leading coefficient
/// vanishes. A negative discriminant is reported through the diagnostics,
/// not thrown: it signals an infeasible child location.
inline DirectResult direct_solve(const LocalStencil& st, double g0,
                                 const Vec3& r_hat) {
  DirectResult res;
  DirectDiagnostics& d = res.diag;
  d.g0 = g0;

  const double rm = r_hat.dot(st.m_vec);
  const double rn = r_hat.dot(st.n_vec);
  d.k1 = rm * rm;
  d.k2 = rm * rn;
  d.k3 = rn * rn;
  d.k4 = st.m_vec.dot(st.m_vec);
  d.k5 = st.m_vec.dot(st.n_vec);
  d.k6 = st.n_vec.dot(st.n_vec);
  d.rho1 = -2.0 * d.k2 * d.k5 + d.k1 * d.k6 + d.k3 * d.k4;
  d.rho2 = d.rho1 + d.k5 * d.k5 - d.k4 * d.k6;

  const double g2 = g0 * g0;
  const double a = d.k1 + g2 * (d.k1 - d.k4);
  const double b = d.k2 + g2 * (d.k2 - d.k5);
  const double c = d.k3 + g2 * (d.k3 - d.k6);

  d.discriminant = d.rho1 + d.rho2 * g2;
  d.clamp_tolerance =
      1e-12 * std::max(1.0, std::abs(d.rho1) + std::abs(d.rho2) * g2);

  const double lead_scale = 1e-14 * (1.0 + g2) * std::max(1.0, d.k4);
  if (std::abs(a) <= lead_scale) {
    d.linear_branch = true;
    if (std::abs(b) <= 1e-14 * (1.0 + g2) * std::max(d.k4, d.k6)) {
      d.degenerate = true;
      return res;
    }
    res.w = -c / (2.0 * b);
  } else {
    if (d.discriminant < -d.clamp_tolerance) return res;  // infeasible location
    const double rad = std::max(d.discriminant, 0.0);
    res.w = (-b + g0 * std::sqrt(rad)) / a;
  }

  const Vec3 nu = st.nu_tilde(*res.w);
  const double rdot = nu.dot(r_hat);
  const double root = std::sqrt(std::max(0.0, nu.dot(nu) - rdot * rdot));
  d.branch_residual = rdot + g0 * root;
  const double scale = std::abs(rdot) + std::abs(g0) * root;
  d.branch_admissible =
      std::abs(d.branch_residual) <= 1e-6 * std::max(scale, 1e-300);
  d.gradient_norm = std::sqrt(std::max(0.0, nu.dot(nu) - 1.0));
  return res;
}

/// Pseudo-time iteration parameters. epsilon is the half-width of the height
/// neighbourhood sampled when estimating the time-step bound.
struct IterativeConfig {
  double epsilon = 0.0;
  int samples = 10;
  double tolerance = 1e-10;  // stop when the step is below tolerance*dtau
  int max_iterations = 100;
  double dtau_max = 0.0;

  static IterativeConfig for_spacing(double h) {
    IterativeConfig cfg;
    cfg.epsilon = h / 10.0;
    cfg.dtau_max = h;
    return cfg;
  }
};

namespace detail {
struct ResidualParts {
  double r_dot = 0.0;   // nu.R
  double root = 0.0;    // sqrt(nu.nu - (nu.R)^2), clamped at zero
  bool clamped = false;
};

inline ResidualParts residual_parts(const LocalStencil& st, const Vec3& r_hat,
                                    double w) {
  ResidualParts p;
  const Vec3 nu = st.nu_tilde(w);
  p.r_dot = nu.dot(r_hat);
  double rad = nu.dot(nu) - p.r_dot * p.r_dot;
  if (rad < 0.0) {
    p.clamped = true;
    rad = 0.0;
  }
  p.root = std::sqrt(rad);
  return p;
}
}  // namespace detail

/// Pseudo-time step for the iterative solver: 0.9 * 2*epsilon / Q where Q
/// bounds the residual variation over heights sampled around w0, capped at
/// dtau_max. A vanishing Q means the residual is locally constant and the
/// cap is returned.
template <typename SpeedAtHeight>
double pseudo_time_step(const LocalStencil& st, const Vec3& r_hat,
                        SpeedAtHeight&& speed_at, double w0,
                        const IterativeConfig& cfg) {
  const int n = cfg.samples;
  std::vector<double> rdot(n), root(n), g(n);
  for (int i = 0; i < n; ++i) {
    const double w =
        w0 - cfg.epsilon + (2.0 * cfg.epsilon) * double(i) / double(n - 1);
    auto parts = detail::residual_parts(st, r_hat, w);
    rdot[i] = parts.r_dot;
    root[i] = parts.root;
    g[i] = speed_at(w);
  }
  double q = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double bound = std::abs(rdot[j] - rdot[i]) +
                           std::abs(g[i]) * std::abs(root[i] - root[j]) +
                           std::abs(g[i] - g[j]) * root[j];
      q = std::max(q, bound);
    }
  }
  if (q <= 1e-14) return cfg.dtau_max;
  return std::min(0.9 * (2.0 * cfg.epsilon) / q, cfg.dtau_max);
}

struct IterativeResult {
  double w = 0.0;
  int iterations = 0;
  bool converged = false;
  bool radicand_clamped = false;
  double dtau = 0.0;
};

/// Fixed-point pseudo-time iteration letting the speed depend on the child
/// height. speed_at(w) must evaluate the speed at the child's global-space
/// position for height w. Starts from w0 (normally the direct solution) and
/// stops when the update falls below tolerance*dtau.
template <typename SpeedAtHeight>
IterativeResult iterative_solve(const LocalStencil& st, const Vec3& r_hat,
                                SpeedAtHeight&& speed_at, double w0,
                                const IterativeConfig& cfg) {
  IterativeResult out;
  out.dtau = pseudo_time_step(st, r_hat, speed_at, w0, cfg);
  double w = w0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    auto parts = detail::residual_parts(st, r_hat, w);
    out.radicand_clamped |= parts.clamped;
    const double residual = parts.r_dot + speed_at(w) * parts.root;
    const double w_next = w + out.dtau * residual;
    out.iterations = it;
    if (std::abs(w_next - w) < cfg.tolerance * out.dtau) {
      out.w = w_next;
      out.converged = true;
      return out;
    }
    w = w_next;
  }
  out.w = w;
  return out;
}

}  // namespace fmarch
