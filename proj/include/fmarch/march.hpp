#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "fmarch/book.hpp"
#include "fmarch/frame.hpp"
#include "fmarch/placement.hpp"
#include "fmarch/solver.hpp"
#include "fmarch/speed_fields.hpp"
#include "fmarch/vec.hpp"

namespace fmarch {

/// A sample of the spacetime manifold: vertex of the output graph.
struct SpacetimePoint {
  Vec3 pos;     // (x, y, t)
  Vec3 normal;  // unit outward spacetime normal
  NodeId id = 0;
  NodeId parent_a = 0;  // 0 marks a seed point
  NodeId parent_b = 0;
};

struct MarchConfig {
  double final_time = 0.5;
  int neighbor_count = 10;  // L
  int grid_size = 10;       // s
  int max_refinements = 5;
  bool test_mode = false;   // per-iteration brute-force band scans
  int snapshot_every = 0;   // extra book snapshots; 0 keeps first and last only
};

struct BookSnapshot {
  std::size_t iteration = 0;
  std::vector<std::pair<NodeId, NodeId>> segments;
};

/// Output graph: accepted points in acceptance order (parents always precede
/// their children) plus the run's repulsion parameter.
struct FrontGraph {
  std::vector<SpacetimePoint> points;
  double h = 0.0;
};

struct MarchReport {
  FrontGraph graph;
  std::size_t iterations = 0;
  std::size_t max_narrow_band = 0;
  std::size_t children = 0;
  double max_accepted_time = 0.0;
  double min_parent_distance_h = std::numeric_limits<double>::infinity();
  int iterative_iterations_max = 0;
  long v2_pass_e_fail_nodes = 0;  // grid nodes passing (V2) but failing (E)
  long placement_nodes = 0;
  // Accepted-without-child counts by cause (index by ChildFailure).
  std::array<long, 5> child_failures{};
  std::vector<BookSnapshot> book_snapshots;
  std::vector<std::string> violations;  // non-empty only when invariants broke
};

/// Narrow band: tentative points with extract-min on (t, id).
class NarrowBand {
 public:
  void insert(const SpacetimePoint& p) {
    points_.emplace(p.id, p);
    heap_.push({p.pos.z, p.id});
  }
  bool contains(NodeId id) const { return points_.count(id) > 0; }
  void erase(NodeId id) { points_.erase(id); }
  std::size_t size() const { return points_.size(); }
  const SpacetimePoint& at(NodeId id) const { return points_.at(id); }

  std::optional<SpacetimePoint> extract_min() {
    while (!heap_.empty()) {
      auto [t, id] = heap_.top();
      heap_.pop();
      auto it = points_.find(id);
      if (it == points_.end()) continue;  // removed by bookkeeping
      SpacetimePoint p = it->second;
      points_.erase(it);
      return p;
    }
    return std::nullopt;
  }

 private:
  std::map<NodeId, SpacetimePoint> points_;
  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
};

/// L nearest accepted points to `pos`, excluding `self`, as ids ordered by
/// (distance, id). The accepted list is time-ordered, so the backward scan
/// stops once the time gap alone exceeds the current L-th best distance.
inline std::vector<NodeId> nearest_accepted(const std::vector<SpacetimePoint>& accepted,
                                            const Vec3& pos, NodeId self, int L) {
  std::vector<std::pair<double, NodeId>> best;  // sorted ascending
  best.reserve(L + 1);
  for (auto it = accepted.rbegin(); it != accepted.rend(); ++it) {
    const SpacetimePoint& q = *it;
    if (q.id == self) continue;
    const double gap = pos.z - q.pos.z;
    if (static_cast<int>(best.size()) == L && gap > best.back().first) break;
    const double d = dist(pos, q.pos);
    const std::pair<double, NodeId> entry{d, q.id};
    if (static_cast<int>(best.size()) < L || entry < best.back()) {
      auto ins = std::lower_bound(best.begin(), best.end(), entry);
      best.insert(ins, entry);
      if (static_cast<int>(best.size()) > L) best.pop_back();
    }
  }
  std::vector<NodeId> out;
  out.reserve(best.size());
  for (const auto& [d, id] : best) out.push_back(id);
  return out;
}

/// Local representation at a freshly accepted point: the L-point accepted
/// neighbourhood, a hyperplane normal positively aligned with every
/// neighbourhood normal (default: the point's own), and the frame built from
/// it. Returns nothing when no admissible normal is found, in which case the
/// point is accepted without a child.
struct LocalRep {
  Frame frame;
  Vec3 nu_bar;
  std::vector<NodeId> neighborhood;  // ordered by (distance, id)
};

template <typename PointLookup>
std::optional<LocalRep> local_representation(const std::vector<SpacetimePoint>& accepted,
                                             const PointLookup& point_of,
                                             const SpacetimePoint& p_a, int L) {
  LocalRep rep;
  rep.neighborhood = nearest_accepted(accepted, p_a.pos, p_a.id, L);
  rep.nu_bar = p_a.normal;
  while (true) {
    bool ok = true;
    for (NodeId id : rep.neighborhood) {
      if (rep.nu_bar.dot(point_of(id).normal) <= 0.0) {
        ok = false;
        break;
      }
    }
    if (ok) break;
    if (rep.neighborhood.size() <= 2) return std::nullopt;
    rep.neighborhood.pop_back();  // drop the farthest and retest
  }
  rep.frame = frame_from_normal(rep.nu_bar);
  return rep;
}

struct NewPoint {
  Vec3 pos;
  Vec3 normal;
  NodeId parent_b = 0;
  int iterations = 0;  // iterative-solver count
  long v2_pass_e_fail = 0;
  long nodes_evaluated = 0;
};

/// Why a child could not be computed, for run diagnostics.
enum class ChildFailure { kNone, kNoRepresentation, kNoCandidate, kGridInfeasible, kIterativeFailed };

/// Child computation: pick the nearest admissible second parent, solve the
/// constrained placement, then refine the height with the iterative solver.
/// Falls through the remaining second-parent candidates when a placement is
/// infeasible; returns nothing when all fail.
template <typename PointLookup>
std::optional<NewPoint> compute_new_point(const SpeedField& field,
                                          const SpacetimePoint& p_a,
                                          const LocalRep& rep,
                                          const PointLookup& point_of, double h,
                                          const MarchConfig& cfg,
                                          ChildFailure* failure = nullptr) {
  const Frame& frame = rep.frame;
  const Vec3 qa = frame.to_local(p_a.pos);
  const double g_a = field.speed_at(p_a.pos);
  const double dt = h / std::sqrt(g_a * g_a + 1.0);
  const Vec3 r_hat = frame.r_hat();

  std::vector<Vec3> neighbors_global;
  neighbors_global.reserve(rep.neighborhood.size() + 1);
  neighbors_global.push_back(p_a.pos);
  for (NodeId id : rep.neighborhood) neighbors_global.push_back(point_of(id).pos);

  NewPoint out;
  if (failure) *failure = ChildFailure::kNoCandidate;
  const IterativeConfig itcfg = IterativeConfig::for_spacing(h);
  for (NodeId cand : rep.neighborhood) {
    const SpacetimePoint& p_b = point_of(cand);
    const Vec3 qb = frame.to_local(p_b.pos);
    if (qb.x - qa.x <= h / 2.0) continue;
    if (failure && *failure == ChildFailure::kNoCandidate)
      *failure = ChildFailure::kGridInfeasible;

    PlacementProblem prob;
    prob.parent_a = qa;
    prob.parent_b = qb;
    prob.t_a = p_a.pos.z;
    prob.t_b = p_b.pos.z;
    prob.speed_at_a = g_a;
    prob.h = h;
    prob.dt = dt;
    prob.frame = frame;
    prob.neighbors = neighbors_global;
    prob.grid_size = cfg.grid_size;
    prob.max_refinements = cfg.max_refinements;

    auto placed = grid_search(prob);
    if (!placed) continue;
    out.v2_pass_e_fail += placed->v2_pass_e_fail;
    out.nodes_evaluated += placed->nodes_evaluated;

    auto st = build_stencil(qa, qb, placed->child_uv);
    if (!st) continue;
    auto speed_at = [&](double w) {
      return field.speed_at(frame.to_global({placed->child_uv.x, placed->child_uv.y, w}));
    };
    auto iter = iterative_solve(*st, r_hat, speed_at, placed->w_direct, itcfg);
    if (!iter.converged) {  // non-convergence: treat as infeasible
      if (failure) *failure = ChildFailure::kIterativeFailed;
      continue;
    }

    // Keep the refined height only if it still satisfies (V2) and (E).
    double w_d = iter.w;
    Vec3 local{placed->child_uv.x, placed->child_uv.y, w_d};
    if (!check_v2(r_hat.dot(local), prob.t_a, prob.t_b, dt) ||
        !check_e(frame.to_global(local), prob.neighbors, h)) {
      w_d = placed->w_direct;
      local.z = w_d;
    }

    out.pos = frame.to_global(local);
    out.normal = frame.to_global(child_normal(*st, w_d));
    out.parent_b = cand;
    out.iterations = iter.iterations;
    if (failure) *failure = ChildFailure::kNone;
    return out;
  }
  return std::nullopt;
}

/// The marching algorithm: seeds the band from an initial front sampling and
/// grows the accepted graph until the band empties.
class Marcher {
 public:
  Marcher(const SpeedField& field, const FrontSample& sample, MarchConfig cfg)
      : field_(field), cfg_(cfg) {
    if (sample.points.size() < 3)
      throw std::invalid_argument("march: need at least 3 seed points");
    const std::size_t m = sample.points.size();
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        min_dist = std::min(min_dist, dist(sample.points[i], sample.points[j]));
    if (!(min_dist > 0.0))
      throw std::invalid_argument("march: duplicate seed positions");
    h_ = min_dist / 2.0;
    seeds_ = m;
    next_id_ = static_cast<NodeId>(m) + 1;

    accepted_.reserve(4 * m);
    for (std::size_t i = 0; i < m; ++i) {
      SpacetimePoint p;
      p.pos = sample.points[i];
      p.normal = sample.normals[i];
      p.id = static_cast<NodeId>(i) + 1;
      store_accepted(p);
      band_.insert(p);
      book_.add_node(p.id);
    }
    for (const auto& comp : sample.components) {
      for (int k = 0; k < comp.count; ++k) {
        const NodeId a = static_cast<NodeId>(comp.first + k) + 1;
        const NodeId b = static_cast<NodeId>(comp.first + (k + 1) % comp.count) + 1;
        book_.add_segment(a, b);
      }
    }
  }

  double h() const { return h_; }

  MarchReport run() {
    MarchReport rep;
    take_snapshot(rep, 0);
    auto posfn = [this](NodeId id) { return band_.at(id).pos.xy(); };

    double last_accepted_t = 0.0;
    while (auto popped = band_.extract_min()) {
      const SpacetimePoint p_a = *popped;
      ++rep.iterations;

      if (p_a.id > seeds_) store_accepted(p_a);  // seeds are in A already
      if (p_a.pos.z < last_accepted_t - 1e-12)
        rep.violations.push_back("acceptance time decreased at id " +
                                 std::to_string(p_a.id));
      last_accepted_t = std::max(last_accepted_t, p_a.pos.z);
      rep.max_accepted_time = std::max(rep.max_accepted_time, p_a.pos.z);

      bool new_point = false;
      NodeId child_id = 0;
      if (p_a.pos.z < cfg_.final_time) {
        auto point_of = [this](NodeId id) -> const SpacetimePoint& {
          return accepted_[index_of_.at(id)];
        };
        auto lrep = local_representation(accepted_, point_of, p_a, cfg_.neighbor_count);
        ChildFailure fail = ChildFailure::kNoRepresentation;
        if (lrep) {
          auto np = compute_new_point(field_, p_a, *lrep, point_of, h_, cfg_, &fail);
          if (np) {
            rep.v2_pass_e_fail_nodes += np->v2_pass_e_fail;
            rep.placement_nodes += np->nodes_evaluated;
            SpacetimePoint child;
            child.pos = np->pos;
            child.normal = np->normal;
            child.id = next_id_++;
            child.parent_a = p_a.id;
            child.parent_b = np->parent_b;
            band_.insert(child);
            new_point = true;
            child_id = child.id;
            ++rep.children;
            rep.iterative_iterations_max =
                std::max(rep.iterative_iterations_max, np->iterations);
            const double da = dist(child.pos, p_a.pos) / h_;
            const double db = dist(child.pos, point_of(np->parent_b).pos) / h_;
            rep.min_parent_distance_h =
                std::min({rep.min_parent_distance_h, da, db});
            if (std::min(da, db) < 1.0 - 1e-9)
              rep.violations.push_back("child " + std::to_string(child.id) +
                                       " closer than h to a parent");
          }
        }
        ++rep.child_failures[static_cast<int>(fail)];
      }

      if (new_point)
        book_.replace_node(p_a.id, child_id);
      else
        book_.drop_node(p_a.id, posfn);
      for (NodeId id : book_.bookkeeping(new_point,
                                         new_point ? std::optional<NodeId>(child_id)
                                                   : std::nullopt,
                                         posfn))
        band_.erase(id);

      rep.max_narrow_band = std::max(rep.max_narrow_band, band_.size());
      if (rep.max_narrow_band > seeds_)
        rep.violations.push_back("narrow band exceeded seed count at iteration " +
                                 std::to_string(rep.iterations));
      if (cfg_.test_mode) {
        auto v = scan_book_violations(book_.segments(), book_.nodes(), posfn);
        for (auto& s : v)
          rep.violations.push_back("iter " + std::to_string(rep.iterations) + ": " + s);
      }
      if (cfg_.snapshot_every > 0 && rep.iterations % cfg_.snapshot_every == 0)
        take_snapshot(rep, rep.iterations);
    }

    take_snapshot(rep, rep.iterations);
    rep.graph.points = accepted_;
    rep.graph.h = h_;
    return rep;
  }

 private:
  void store_accepted(const SpacetimePoint& p) {
    index_of_[p.id] = accepted_.size();
    accepted_.push_back(p);
  }

  void take_snapshot(MarchReport& rep, std::size_t iteration) {
    rep.book_snapshots.push_back({iteration, book_.segments()});
  }

  const SpeedField& field_;
  MarchConfig cfg_;
  double h_ = 0.0;
  std::size_t seeds_ = 0;
  NodeId next_id_ = 1;
  std::vector<SpacetimePoint> accepted_;
  std::map<NodeId, std::size_t> index_of_;
  NarrowBand band_;
  Book book_;
};

}  // namespace fmarch
