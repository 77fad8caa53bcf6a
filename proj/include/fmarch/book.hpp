#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fmarch/vec.hpp"

namespace fmarch {

using NodeId = std::uint32_t;

/// Thrown when the band topology cannot be repaired (odd hanging-node count
/// or a non-terminating clean loop).
struct BookCorruption : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// xy positions of band points, supplied by the caller.
using PositionFn = std::function<Vec2(NodeId)>;

namespace bookdetail {

inline double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b - a).cross(c - a);
}

inline bool on_bbox(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

/// Intersection test for xy segments with a collinearity tolerance; callers
/// exclude pairs sharing an endpoint id before calling.
inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1,
                               const Vec2& q2) {
  const double lp = dist(p1, p2);
  const double lq = dist(q1, q2);
  const double tol = 1e-14 * std::max(lp * lq, 1e-300);
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) &&
      ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)))
    return true;
  if (std::abs(d1) <= tol && on_bbox(q1, q2, p1)) return true;
  if (std::abs(d2) <= tol && on_bbox(q1, q2, p2)) return true;
  if (std::abs(d3) <= tol && on_bbox(p1, p2, q1)) return true;
  if (std::abs(d4) <= tol && on_bbox(p1, p2, q2)) return true;
  return false;
}

}  // namespace bookdetail

/// Undirected segment list over the narrow band, encoding the front's
/// topology. Each band point must appear in exactly two segments once the
/// clean procedure has run; the checks below restore that state after every
/// band update, deleting segments and occasionally evicting points from the
/// band (the eviction list is handed back so the band can drop them too).
class Book {
 public:
  struct Segment {
    NodeId a = 0, b = 0;
    bool alive = false;
  };

  void add_node(NodeId id) { nodes_.insert(id); }
  bool has_node(NodeId id) const { return nodes_.count(id) > 0; }
  std::size_t node_count() const { return nodes_.size(); }

  void add_segment(NodeId a, NodeId b) {
    const int idx = static_cast<int>(segments_.size());
    segments_.push_back({a, b, true});
    adjacency_[a].push_back(idx);
    if (b != a) adjacency_[b].push_back(idx);
    ++revision_;
  }

  int degree(NodeId id) const {
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) return 0;
    int d = 0;
    for (int idx : it->second) {
      if (!segments_[idx].alive) continue;
      // A self-loop contributes two appearances.
      d += (segments_[idx].a == segments_[idx].b) ? 2 : 1;
    }
    return d;
  }

  std::size_t segment_count() const {
    std::size_t n = 0;
    for (const auto& s : segments_)
      if (s.alive) ++n;
    return n;
  }

  /// Alive segments as normalized sorted pairs.
  std::vector<std::pair<NodeId, NodeId>> segments() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (const auto& s : segments_) {
      if (!s.alive) continue;
      out.emplace_back(std::min(s.a, s.b), std::max(s.a, s.b));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<NodeId> nodes() const {
    return std::vector<NodeId>(nodes_.begin(), nodes_.end());
  }

  /// Relabels the two segments of an accepted point to its child.
  void replace_node(NodeId old_id, NodeId new_id) {
    if (!has_node(old_id)) throw std::invalid_argument("Book::replace_node: absent id");
    if (degree(old_id) != 2)
      throw std::invalid_argument("Book::replace_node: node degree is not 2");
    auto& old_adj = adjacency_[old_id];
    for (int idx : old_adj) {
      Segment& s = segments_[idx];
      if (!s.alive) continue;
      if (s.a == old_id) s.a = new_id;
      if (s.b == old_id) s.b = new_id;
      adjacency_[new_id].push_back(idx);
    }
    adjacency_.erase(old_id);
    nodes_.erase(old_id);
    nodes_.insert(new_id);
    ++revision_;
  }

  /// Removes a band point and its segments, then stitches the hanging ends.
  void drop_node(NodeId id, const PositionFn& pos) {
    if (!has_node(id)) throw std::invalid_argument("Book::drop_node: absent id");
    remove_node_segments(id);
    nodes_.erase(id);
    stitch_hanging_nodes(pos);
  }

  /// Joins hanging nodes pairwise, nearest xy-distance first, until none
  /// remain. An odd number of hanging nodes means the topology is corrupt.
  void stitch_hanging_nodes(const PositionFn& pos) {
    std::set<std::pair<NodeId, NodeId>> no_forbidden;
    stitch_internal(pos, no_forbidden);
  }

  /// Multiplicity: points with more than two segments lose their longest
  /// ones. Returns points evicted from the band (isolated afterwards).
  std::vector<NodeId> check_multiplicity(const PositionFn& pos) {
    bool trimmed = false;
    for (NodeId id : nodes()) {
      while (degree(id) > 2) {
        trimmed = true;
        remove_segment(longest_segment_at(id, pos));
      }
    }
    if (trimmed) stitch_hanging_nodes(pos);
    return evict_isolated();
  }

  /// Loops: self-loops are deleted; a segment pair joining the same two
  /// points is removed entirely, after which the nodes are either stitched
  /// back into the band or evicted when nothing remains to attach them to.
  std::vector<NodeId> check_loops(const PositionFn& pos) {
    std::vector<NodeId> removed;
    for (int pass = 0; pass < 64; ++pass) {
      bool changed = false;
      for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (segments_[i].alive && segments_[i].a == segments_[i].b) {
          remove_segment(static_cast<int>(i));
          changed = true;
        }
      }
      std::map<std::pair<NodeId, NodeId>, std::vector<int>> groups;
      for (std::size_t i = 0; i < segments_.size(); ++i) {
        const Segment& s = segments_[i];
        if (!s.alive) continue;
        groups[{std::min(s.a, s.b), std::max(s.a, s.b)}].push_back(
            static_cast<int>(i));
      }
      for (const auto& [key, idxs] : groups) {
        if (idxs.size() < 2) continue;
        for (int idx : idxs) remove_segment(idx);
        changed = true;
      }
      if (!changed) break;
      stitch_hanging_nodes(pos);
      auto ev = evict_isolated();
      removed.insert(removed.end(), ev.begin(), ev.end());
    }
    return removed;
  }

  /// Intersections: both segments of a crossing pair are deleted and the
  /// four loose ends re-stitched, with the original pairings forbidden so
  /// the final configuration differs from the one that crossed.
  std::vector<NodeId> check_intersections(const PositionFn& pos,
                                          std::optional<NodeId> focus = {}) {
    std::vector<NodeId> removed;
    for (int pass = 0; pass < 256; ++pass) {
      auto crossing = find_crossing(pos, focus);
      if (!crossing) break;
      const auto [i, j] = *crossing;
      std::set<std::pair<NodeId, NodeId>> forbidden;
      forbidden.insert(norm_pair(segments_[i].a, segments_[i].b));
      forbidden.insert(norm_pair(segments_[j].a, segments_[j].b));
      remove_segment(i);
      remove_segment(j);
      auto ev1 = stitch_internal(pos, forbidden);
      removed.insert(removed.end(), ev1.begin(), ev1.end());
      auto ev2 = evict_isolated();
      removed.insert(removed.end(), ev2.begin(), ev2.end());
      // After a restitch near the focus the damage may be anywhere.
      focus.reset();
    }
    return removed;
  }

  /// Spikes: a band point whose two segments meet at an angle below 0.2*pi
  /// is evicted and its neighbours stitched.
  std::vector<NodeId> check_spikes(const PositionFn& pos,
                                   std::optional<NodeId> focus = {}) {
    std::vector<NodeId> removed;
    for (int pass = 0; pass < 256; ++pass) {
      std::optional<NodeId> apex;
      for (NodeId id : nodes()) {
        if (focus && !near_focus(id, *focus)) continue;
        if (degree(id) != 2) continue;
        auto nbrs = neighbors(id);
        if (nbrs.size() != 2 || nbrs[0] == nbrs[1]) continue;
        const Vec2 d1 = pos(nbrs[0]) - pos(id);
        const Vec2 d2 = pos(nbrs[1]) - pos(id);
        const double n1 = d1.norm(), n2 = d2.norm();
        double angle = 0.0;  // coincident points count as a spike
        if (n1 > 0.0 && n2 > 0.0) {
          const double c = std::clamp(d1.dot(d2) / (n1 * n2), -1.0, 1.0);
          angle = std::acos(c);
        }
        if (angle < 0.2 * M_PI) {
          apex = id;
          break;
        }
      }
      if (!apex) break;
      remove_node_segments(*apex);
      nodes_.erase(*apex);
      removed.push_back(*apex);
      stitch_hanging_nodes(pos);
      auto ev = evict_isolated();
      removed.insert(removed.end(), ev.begin(), ev.end());
      focus.reset();
    }
    return removed;
  }

  /// Clean procedure: iterate the multiplicity, loop and intersection checks
  /// until the book stops changing.
  std::vector<NodeId> clean(const PositionFn& pos) {
    std::vector<NodeId> removed;
    for (int pass = 0; pass < 256; ++pass) {
      const std::uint64_t before = revision_;
      auto r1 = check_multiplicity(pos);
      auto r2 = check_loops(pos);
      auto r3 = check_intersections(pos);
      removed.insert(removed.end(), r1.begin(), r1.end());
      removed.insert(removed.end(), r2.begin(), r2.end());
      removed.insert(removed.end(), r3.begin(), r3.end());
      if (revision_ == before) return removed;
    }
    throw BookCorruption("Book::clean did not reach a fixed point");
  }

  /// Per-iteration bookkeeping after the band update. When a new point was
  /// inserted the intersection and spike checks start from its segments;
  /// otherwise the whole book is cleaned first.
  std::vector<NodeId> bookkeeping(bool new_point, std::optional<NodeId> focus,
                                  const PositionFn& pos) {
    std::vector<NodeId> removed;
    if (node_count() <= 1) return removed;
    auto absorb = [&removed](std::vector<NodeId> r) {
      removed.insert(removed.end(), r.begin(), r.end());
    };
    if (!new_point) absorb(clean(pos));
    const std::uint64_t before_inter = revision_;
    absorb(check_intersections(pos, new_point ? focus : std::nullopt));
    if (revision_ != before_inter) absorb(clean(pos));
    const std::uint64_t before_spikes = revision_;
    absorb(check_spikes(pos, new_point ? focus : std::nullopt));
    if (revision_ != before_spikes) absorb(clean(pos));
    std::sort(removed.begin(), removed.end());
    removed.erase(std::unique(removed.begin(), removed.end()), removed.end());
    return removed;
  }

  std::vector<NodeId> neighbors(NodeId id) const {
    std::vector<NodeId> out;
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) return out;
    for (int idx : it->second) {
      const Segment& s = segments_[idx];
      if (!s.alive) continue;
      out.push_back(s.a == id ? s.b : s.a);
    }
    return out;
  }

 private:
  static std::pair<NodeId, NodeId> norm_pair(NodeId a, NodeId b) {
    return {std::min(a, b), std::max(a, b)};
  }

  void remove_segment(int idx) {
    if (!segments_[idx].alive) return;
    segments_[idx].alive = false;
    ++revision_;
  }

  void remove_node_segments(NodeId id) {
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) return;
    for (int idx : it->second) remove_segment(idx);
  }

  int longest_segment_at(NodeId id, const PositionFn& pos) {
    int best = -1;
    double best_len = -1.0;
    for (int idx : adjacency_.at(id)) {
      const Segment& s = segments_[idx];
      if (!s.alive) continue;
      const double len = dist(pos(s.a), pos(s.b));
      if (len > best_len || (len == best_len && idx > best)) {
        best_len = len;
        best = idx;
      }
    }
    return best;
  }

  std::vector<NodeId> hanging_nodes() const {
    std::vector<NodeId> out;
    for (NodeId id : nodes_)
      if (degree(id) == 1) out.push_back(id);
    return out;
  }

  /// Nodes that lost all segments leave the band.
  std::vector<NodeId> evict_isolated() {
    std::vector<NodeId> out;
    for (NodeId id : nodes()) {
      if (degree(id) == 0) {
        nodes_.erase(id);
        out.push_back(id);
        ++revision_;
      }
    }
    return out;
  }

  std::vector<NodeId> stitch_internal(
      const PositionFn& pos,
      const std::set<std::pair<NodeId, NodeId>>& forbidden) {
    std::vector<NodeId> evicted;
    for (int guard = 0; guard < 4096; ++guard) {
      auto hanging = hanging_nodes();
      if (hanging.empty()) return evicted;
      if (hanging.size() % 2 != 0)
        throw BookCorruption("stitch: odd number of hanging nodes");
      double best_d = std::numeric_limits<double>::infinity();
      std::pair<NodeId, NodeId> best{0, 0};
      bool have = false;
      for (std::size_t i = 0; i < hanging.size(); ++i) {
        for (std::size_t j = i + 1; j < hanging.size(); ++j) {
          auto key = norm_pair(hanging[i], hanging[j]);
          if (forbidden.count(key)) continue;
          const double d = dist(pos(hanging[i]), pos(hanging[j]));
          if (!have || d < best_d || (d == best_d && key < best)) {
            best_d = d;
            best = key;
            have = true;
          }
        }
      }
      if (!have) {
        // Only forbidden pairings remain: those ends cannot be reattached,
        // so the points leave the band and their segments cascade.
        for (NodeId id : hanging) {
          remove_node_segments(id);
          nodes_.erase(id);
          evicted.push_back(id);
          ++revision_;
        }
        continue;
      }
      add_segment(best.first, best.second);
    }
    throw BookCorruption("stitch: did not terminate");
  }

  bool near_focus(NodeId id, NodeId focus) const {
    if (id == focus) return true;
    for (NodeId n : neighbors(focus))
      if (n == id) return true;
    return false;
  }

  std::optional<std::pair<int, int>> find_crossing(
      const PositionFn& pos, std::optional<NodeId> focus) const {
    std::vector<int> left;
    if (focus && adjacency_.count(*focus)) {
      for (int idx : adjacency_.at(*focus))
        if (segments_[idx].alive) left.push_back(idx);
    } else {
      for (std::size_t i = 0; i < segments_.size(); ++i)
        if (segments_[i].alive) left.push_back(static_cast<int>(i));
    }
    for (int i : left) {
      const Segment& s1 = segments_[i];
      for (std::size_t j = 0; j < segments_.size(); ++j) {
        const int ji = static_cast<int>(j);
        if (ji == i) continue;
        const Segment& s2 = segments_[j];
        if (!s2.alive) continue;
        if (s1.a == s2.a || s1.a == s2.b || s1.b == s2.a || s1.b == s2.b)
          continue;
        if (bookdetail::segments_intersect(pos(s1.a), pos(s1.b), pos(s2.a),
                                           pos(s2.b)))
          return std::make_pair(std::min(i, ji), std::max(i, ji));
      }
    }
    return std::nullopt;
  }

  std::set<NodeId> nodes_;
  std::vector<Segment> segments_;
  std::map<NodeId, std::vector<int>> adjacency_;
  std::uint64_t revision_ = 0;
};

/// Brute-force scan of the four band invariants on a segment snapshot;
/// independent of the incremental bookkeeping above. Returns one line per
/// violation.
inline std::vector<std::string> scan_book_violations(
    const std::vector<std::pair<NodeId, NodeId>>& segments,
    const std::vector<NodeId>& band_nodes, const PositionFn& pos) {
  std::vector<std::string> out;
  std::map<NodeId, std::vector<NodeId>> adj;
  std::map<std::pair<NodeId, NodeId>, int> seen;
  for (const auto& [a, b] : segments) {
    if (a == b) out.push_back("self-loop at node " + std::to_string(a));
    adj[a].push_back(b);
    adj[b].push_back(a);
    if (++seen[{a, b}] == 2)
      out.push_back("duplicate segment " + std::to_string(a) + "-" +
                    std::to_string(b));
  }
  for (NodeId id : band_nodes) {
    const int deg = adj.count(id) ? static_cast<int>(adj[id].size()) : 0;
    if (deg != 2)
      out.push_back("node " + std::to_string(id) + " has degree " +
                    std::to_string(deg));
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (std::size_t j = i + 1; j < segments.size(); ++j) {
      const auto& [a1, b1] = segments[i];
      const auto& [a2, b2] = segments[j];
      if (a1 == a2 || a1 == b2 || b1 == a2 || b1 == b2) continue;
      if (bookdetail::segments_intersect(pos(a1), pos(b1), pos(a2), pos(b2)))
        out.push_back("segments " + std::to_string(a1) + "-" + std::to_string(b1) +
                      " and " + std::to_string(a2) + "-" + std::to_string(b2) +
                      " intersect");
    }
  }
  for (const auto& [id, nbrs] : adj) {
    if (nbrs.size() != 2 || nbrs[0] == nbrs[1]) continue;
    const Vec2 d1 = pos(nbrs[0]) - pos(id);
    const Vec2 d2 = pos(nbrs[1]) - pos(id);
    if (d1.norm() == 0.0 || d2.norm() == 0.0) continue;
    const double c = std::clamp(d1.dot(d2) / (d1.norm() * d2.norm()), -1.0, 1.0);
    if (std::acos(c) < 0.2 * M_PI)
      out.push_back("spike at node " + std::to_string(id));
  }
  return out;
}

}  // namespace fmarch
