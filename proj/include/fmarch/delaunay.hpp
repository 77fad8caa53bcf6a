#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "fmarch/vec.hpp"

namespace fmarch {

/// Brute-force Delaunay triangulation of a small planar point set: every
/// triple whose circumcircle contains no other point strictly inside. Near
/// ties (cocircular points) are treated as empty, so both diagonals of a
/// cocircular quad may appear; downstream consumers deduplicate.
inline std::vector<std::array<int, 3>> delaunay_triangles(
    const std::vector<Vec2>& pts) {
  std::vector<std::array<int, 3>> out;
  const int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        const Vec2 a = pts[i], b = pts[j], c = pts[k];
        const double area2 = (b - a).cross(c - a);
        const double scale = std::max({(b - a).norm(), (c - a).norm(), (c - b).norm()});
        if (std::abs(area2) <= 1e-14 * scale * scale) continue;  // degenerate

        // Circumcenter via perpendicular bisector intersection.
        const double bx = b.x - a.x, by = b.y - a.y;
        const double cx = c.x - a.x, cy = c.y - a.y;
        const double d = 2.0 * (bx * cy - by * cx);
        const double ux = (cy * (bx * bx + by * by) - by * (cx * cx + cy * cy)) / d;
        const double uy = (bx * (cx * cx + cy * cy) - cx * (bx * bx + by * by)) / d;
        const Vec2 center{a.x + ux, a.y + uy};
        const double r2 = ux * ux + uy * uy;

        bool empty = true;
        for (int q = 0; q < n && empty; ++q) {
          if (q == i || q == j || q == k) continue;
          const double d2 = (pts[q] - center).norm2();
          if (d2 < r2 * (1.0 - 1e-12)) empty = false;
        }
        if (empty) out.push_back({i, j, k});
      }
    }
  }
  return out;
}

}  // namespace fmarch
