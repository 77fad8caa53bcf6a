#pragma once

#include <cmath>
#include <stdexcept>

namespace fmarch {

/// Vector in the plane; used for uv-grid locations and xy projections.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  Vec2 normalized() const {
    double n = norm();
    if (n == 0.0) throw std::invalid_argument("Vec2: cannot normalize zero vector");
    return {x / n, y / n};
  }
};

/// Vector in R^3. Holds global xyt coordinates (z carries time), local uvw
/// coordinates, or a direction such as a spacetime normal.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm2() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  Vec3 normalized() const {
    double n = norm();
    if (n == 0.0) throw std::invalid_argument("Vec3: cannot normalize zero vector");
    return {x / n, y / n, z / n};
  }

  Vec2 xy() const { return {x, y}; }

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dist(const Vec3& a, const Vec3& b) { return (a - b).norm(); }
inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

}  // namespace fmarch
