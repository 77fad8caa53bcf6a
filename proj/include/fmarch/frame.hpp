#pragma once

#include <cmath>
#include <stdexcept>

#include "fmarch/vec.hpp"

namespace fmarch {

/// Right-handed orthonormal uvw coordinate system attached to a spacetime
/// normal. The rows u, v, w form the change-of-coordinates matrix M mapping
/// global xyt coordinates to local uvw ones; w is the normal the frame was
/// built from, the vw-plane is vertical (u has no time component) and the
/// time component of v is non-negative.
struct Frame {
  Vec3 u;
  Vec3 v;
  Vec3 w;

  /// Third column of M: the only frame data the local PDE solvers need.
  Vec3 r_hat() const { return {u.z, v.z, w.z}; }

  /// Apply M: global xyt -> local uvw. Purely linear, no translation.
  Vec3 to_local(const Vec3& p) const { return {u.dot(p), v.dot(p), w.dot(p)}; }

  /// Apply M^T: local uvw -> global xyt.
  Vec3 to_global(const Vec3& q) const {
    return {u.x * q.x + v.x * q.y + w.x * q.z,
            u.y * q.x + v.y * q.y + w.y * q.z,
            u.z * q.x + v.z * q.y + w.z * q.z};
  }

  double det() const { return u.dot(v.cross(w)); }
};

namespace detail {
inline void require_unit(const Vec3& n) {
  if (std::abs(n.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("frame: normal must be a unit vector");
}
}  // namespace detail

/// Frame for a normal with nonzero time component and nonzero spatial part.
/// The normal defines the plane t = a*x + b*y through the origin with
/// a = -n1/n3, b = -n2/n3; the sign of u is fixed by right-handedness.
inline Frame build_tilted_frame(const Vec3& n) {
  detail::require_unit(n);
  if (n.z == 0.0) throw std::invalid_argument("build_tilted_frame: n3 must be nonzero");
  const double a = -n.x / n.z;
  const double b = -n.y / n.z;
  const double q2 = a * a + b * b;
  if (q2 == 0.0)
    throw std::invalid_argument("build_tilted_frame: degenerate a=b=0 input");
  const double q = std::sqrt(q2);
  const double mu = std::sqrt(1.0 + q2);

  Frame f;
  // +/-(a,b,-1)/mu with the sign matching n3 is n itself; keep it exact.
  f.w = n;
  f.v = Vec3{a / (q * mu), b / (q * mu), q / mu};
  // u = +/-(b,-a,0)/q keeps alpha3 = 0 bit-exact; pick the right-handed sign.
  Vec3 u_ref{b / q, -a / q, 0.0};
  f.u = (u_ref.dot(f.v.cross(f.w)) >= 0.0) ? u_ref : -u_ref;
  return f;
}

/// Frame for a purely spatial normal (vertical plane).
inline Frame build_vertical_frame(const Vec3& n) {
  detail::require_unit(n);
  if (n.z != 0.0) throw std::invalid_argument("build_vertical_frame: n3 must be zero");
  Frame f;
  f.u = Vec3{-n.y, n.x, 0.0};
  f.v = Vec3{0.0, 0.0, 1.0};
  f.w = Vec3{n.x, n.y, 0.0};
  return f;
}

/// Builds the uvw frame for a unit spacetime normal, dispatching to the
/// vertical construction when the time component is below rounding noise.
/// Normals at or numerically indistinguishable from the +/-t axis are
/// rejected; the marching algorithm never produces them since the time
/// component of a front normal is -F/sqrt(1+F^2).
inline Frame frame_from_normal(const Vec3& n) {
  detail::require_unit(n);
  const double spatial2 = n.x * n.x + n.y * n.y;
  if (spatial2 < 1e-24)
    throw std::invalid_argument("frame_from_normal: normal too close to the t-axis");
  if (std::abs(n.z) <= 1e-14) {
    const double s = std::sqrt(spatial2);
    return build_vertical_frame(Vec3{n.x / s, n.y / s, 0.0});
  }
  return build_tilted_frame(n);
}

}  // namespace fmarch
