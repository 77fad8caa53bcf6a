#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "fmarch/delaunay.hpp"
#include "fmarch/frame.hpp"
#include "fmarch/march.hpp"
#include "fmarch/speed_fields.hpp"
#include "fmarch/vec.hpp"

namespace fmarch {

/// |phi| at a graph point: the per-point sampling error when the exact
/// solution is a signed distance (a level-set residual for the rose).
inline double point_error(const SpeedField& field, const Vec3& p) {
  return std::abs(field.phi_at(p));
}

struct Norms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

/// Discrete error norms with the planar h^n weighting, n = 2.
inline Norms error_norms(std::span<const double> errors, double h) {
  if (errors.empty()) throw std::invalid_argument("error_norms: empty error set");
  Norms out;
  double sum = 0.0, sum2 = 0.0;
  for (double e : errors) {
    sum += e;
    sum2 += e * e;
    out.linf = std::max(out.linf, e);
  }
  out.l1 = h * h * sum;
  out.l2 = std::sqrt(h * h * sum2);
  return out;
}

/// Least-squares slope of log(norm) against log(h).
inline double fit_order(std::span<const std::pair<double, double>> h_and_norm) {
  if (h_and_norm.size() < 3)
    throw std::invalid_argument("fit_order: need at least 3 samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h_and_norm.size());
  for (const auto& [h, v] : h_and_norm) {
    if (!(v > 0.0) || !(h > 0.0))
      throw std::invalid_argument("fit_order: nonpositive sample");
    const double x = std::log(h), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct Histogram {
  double bin_width = 0.2;
  std::map<int, long> counts;  // bin index k covers [k*w, (k+1)*w)
  double min_value = std::numeric_limits<double>::infinity();
  double max_value = 0.0;
  long total = 0;

  void add(double v) {
    ++counts[static_cast<int>(std::floor(v / bin_width))];
    min_value = std::min(min_value, v);
    max_value = std::max(max_value, v);
    ++total;
  }
};

/// Child-parent spacetime distances in units of h, one histogram per parent
/// slot, binwidth 0.2.
inline std::pair<Histogram, Histogram> evenness_histograms(const FrontGraph& graph) {
  std::map<NodeId, const SpacetimePoint*> by_id;
  for (const auto& p : graph.points) by_id[p.id] = &p;
  Histogram ha, hb;
  for (const auto& p : graph.points) {
    if (p.parent_a == 0) continue;
    ha.add(dist(p.pos, by_id.at(p.parent_a)->pos) / graph.h);
    hb.add(dist(p.pos, by_id.at(p.parent_b)->pos) / graph.h);
  }
  return {ha, hb};
}

/// Front reconstruction at a fixed time: the graph is triangulated by local
/// tangent-plane Delaunay stars and sliced with the plane t = t_star; every
/// crossing triangle contributes one segment with endpoints interpolated
/// along its crossing edges.
struct ReconstructedFront {
  std::vector<Vec2> points;
  std::vector<std::pair<int, int>> segments;
  int components = 0;
};

inline ReconstructedFront reconstruct_front(const FrontGraph& graph,
                                            double t_star, int L = 10) {
  if (graph.points.empty())
    throw std::invalid_argument("reconstruct_front: empty graph");
  double t_max = 0.0;
  for (const auto& p : graph.points) t_max = std::max(t_max, p.pos.z);
  if (t_star < 0.0 || t_star > t_max)
    throw std::domain_error("reconstruct_front: time outside graph coverage");

  std::map<NodeId, const SpacetimePoint*> by_id;
  for (const auto& p : graph.points) by_id[p.id] = &p;

  const double window = 8.0 * graph.h;
  std::set<std::array<NodeId, 3>> triangles;
  for (const auto& p : graph.points) {
    if (std::abs(p.pos.z - t_star) > window) continue;
    auto nbrs = nearest_accepted(graph.points, p.pos, p.id, L);
    if (nbrs.size() < 2) continue;
    Frame frame = frame_from_normal(p.normal);
    std::vector<Vec2> proj;
    std::vector<NodeId> ids;
    proj.reserve(nbrs.size() + 1);
    proj.push_back({0.0, 0.0});
    ids.push_back(p.id);
    for (NodeId id : nbrs) {
      const Vec3 q = frame.to_local(by_id.at(id)->pos - p.pos);
      proj.push_back({q.x, q.y});
      ids.push_back(id);
    }
    for (const auto& tri : delaunay_triangles(proj)) {
      if (tri[0] != 0 && tri[1] != 0 && tri[2] != 0) continue;  // keep the star of p
      std::array<NodeId, 3> key{ids[tri[0]], ids[tri[1]], ids[tri[2]]};
      std::sort(key.begin(), key.end());
      triangles.insert(key);
    }
  }

  // Slice: each crossing triangle yields one segment keyed by crossing edges.
  ReconstructedFront out;
  std::map<std::pair<NodeId, NodeId>, int> edge_point;
  auto edge_cut = [&](NodeId a, NodeId b) {
    const auto key = std::minmax(a, b);
    auto it = edge_point.find(key);
    if (it != edge_point.end()) return it->second;
    const Vec3& pa = by_id.at(key.first)->pos;
    const Vec3& pb = by_id.at(key.second)->pos;
    const double s = (t_star - pa.z) / (pb.z - pa.z);
    out.points.push_back({pa.x + s * (pb.x - pa.x), pa.y + s * (pb.y - pa.y)});
    const int idx = static_cast<int>(out.points.size()) - 1;
    edge_point.emplace(key, idx);
    return idx;
  };

  for (const auto& tri : triangles) {
    std::array<bool, 3> below;
    for (int i = 0; i < 3; ++i) below[i] = by_id.at(tri[i])->pos.z <= t_star;
    std::vector<std::pair<NodeId, NodeId>> cuts;
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3;
      if (below[i] != below[j]) cuts.emplace_back(tri[i], tri[j]);
    }
    if (cuts.size() != 2) continue;  // no crossing
    const int a = edge_cut(cuts[0].first, cuts[0].second);
    const int b = edge_cut(cuts[1].first, cuts[1].second);
    if (a != b) out.segments.emplace_back(a, b);
  }

  // Component count via union-find over interpolated points.
  std::vector<int> parent(out.points.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& [a, b] : out.segments) parent[find(a)] = find(b);
  std::set<int> roots;
  for (std::size_t i = 0; i < parent.size(); ++i) roots.insert(find(static_cast<int>(i)));
  out.components = static_cast<int>(roots.size());
  return out;
}

/// Hausdorff distance between two planar point clouds by nearest-point
/// search in both directions.
inline double hausdorff_points(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("hausdorff_points: empty cloud");
  auto directed = [](std::span<const Vec2> from, std::span<const Vec2> to) {
    double worst = 0.0;
    for (const Vec2& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec2& q : to) best = std::min(best, dist(p, q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

/// Hausdorff distance between the reconstructed front at t_H and the exact
/// one. For signed-distance solutions the reconstructed-to-exact direction
/// uses |phi| directly; the reverse direction always uses nearest points.
inline double hausdorff(const ReconstructedFront& rec, const SpeedField& field,
                        double t_h, int m_exact) {
  if (rec.points.empty())
    throw std::invalid_argument("hausdorff: empty reconstruction");
  const auto exact = field.exact_front(t_h, m_exact);
  double d_rec_to_ex = 0.0;
  if (field.signed_distance()) {
    for (const Vec2& p : rec.points)
      d_rec_to_ex = std::max(d_rec_to_ex, std::abs(field.phi(p.x, p.y, t_h)));
  } else {
    for (const Vec2& p : rec.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec2& q : exact) best = std::min(best, dist(p, q));
      d_rec_to_ex = std::max(d_rec_to_ex, best);
    }
  }
  double d_ex_to_rec = 0.0;
  for (const Vec2& q : exact) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& p : rec.points) best = std::min(best, dist(q, p));
    d_ex_to_rec = std::max(d_ex_to_rec, best);
  }
  return std::max(d_rec_to_ex, d_ex_to_rec);
}

inline double hausdorff(const FrontGraph& graph, const SpeedField& field,
                        double t_h, int m_exact, int L = 10) {
  return hausdorff(reconstruct_front(graph, t_h, L), field, t_h, m_exact);
}

}  // namespace fmarch
