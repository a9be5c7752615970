#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "pointloc/geometry.hpp"
#include "pointloc/rng.hpp"

// Randomized incremental trapezoidal-map search DAG over a set of
// interior-disjoint triangles.
//
// Degeneracies are handled with the usual symbolic shear: points are ordered
// lexicographically by (x, y), which makes every wall distinct, and on-segment
// ties during a descent resolve to the upper side.  Input edges are split at
// vertices lying in their interior (collinear contacts between neighbouring
// triangles produce those), after which segments only meet at shared
// endpoints.
//
// Queries on the boundary of the covered area resolve to the lowest triangle
// id whose closed region contains the point; the leaf post-pass recovers all
// candidates from the trapezoid's top/bottom segment and corner points.

namespace pointloc {

struct OverlapError : GeometryError {
  using GeometryError::GeometryError;
};

struct IndexedTriangle {
  Point a, b, c;  // CCW
  int id = -1;
};

inline constexpr int kNoTriangle = -1;

// Preprocessed edge soup shared by every DAG built over one triangulation:
// deduplicated split segments with the incident triangle on each side, a
// point table, and per-point incidence lists for vertex queries.
class SegmentSoup {
 public:
  struct Seg {
    int pa, pb;              // point ids, pa <xy pb
    int above = kNoTriangle; // triangle id on the upper (left of pa->pb) side
    int below = kNoTriangle;
  };

  std::vector<Point> points;
  std::vector<Seg> segs;
  std::vector<std::vector<int>> vertex_tris;
  std::vector<int> seg_batch;  // filled by callers that stage insertions
  Coord min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  std::size_t triangle_count = 0;

  static SegmentSoup build(const std::vector<IndexedTriangle>& tris,
                           ComparisonCounter& cmp, bool check_crossings) {
    SegmentSoup soup;
    soup.triangle_count = tris.size();
    if (tris.empty()) throw GeometryError("empty triangle set");

    std::unordered_map<Point, int, PointHash, PointEq> point_ids;
    auto pid = [&](const Point& p) {
      auto [it, fresh] =
          point_ids.emplace(p.normalized(), static_cast<int>(soup.points.size()));
      if (fresh) soup.points.push_back(p.normalized());
      return it->second;
    };

    struct RawEdge {
      int pa, pb;
      int above, below;
    };
    std::vector<RawEdge> raw;
    raw.reserve(tris.size() * 3);
    for (const auto& t : tris) {
      if (orientation(t.a, t.b, t.c, cmp) != Orientation::CCW)
        throw DegenerateTriangle("locator input triangle not CCW");
      const Point* v[3] = {&t.a, &t.b, &t.c};
      for (int e = 0; e < 3; ++e) {
        const Point& p = *v[e];
        const Point& q = *v[(e + 1) % 3];
        const Point& r = *v[(e + 2) % 3];
        int ip = pid(p), iq = pid(q);
        RawEdge re{ip, iq, kNoTriangle, kNoTriangle};
        if (cmp_xy(p, q) > 0) std::swap(re.pa, re.pb);
        Orientation o = orientation(soup.points[re.pa], soup.points[re.pb], r, cmp);
        assert(o != Orientation::COLLINEAR);
        (o == Orientation::CCW ? re.above : re.below) = t.id;
        raw.push_back(re);
      }
    }

    // Split collinear contacts: group by support line, cut each edge at group
    // endpoints interior to it, then merge duplicates and their owners.
    struct LineHash {
      std::size_t operator()(const Line& l) const {
        std::size_t h = std::hash<std::int64_t>()(l.a);
        h = h * 1000003u ^ std::hash<std::int64_t>()(l.b);
        h = h * 1000003u ^ std::hash<std::int64_t>()(l.c);
        return h;
      }
    };
    // Rational endpoints do not admit the integer Line form, so group by a
    // canonical homogeneous line triple instead.
    struct HLine {
      int128 a, b, c;
      bool operator==(const HLine& o) const {
        return a == o.a && b == o.b && c == o.c;
      }
    };
    struct HLineHash {
      std::size_t operator()(const HLine& l) const {
        PointHash ph;
        return ph(Point(l.a, l.b, l.c == 0 ? 1 : (l.c < 0 ? -1 : 1))) ^
               ph(Point(l.c, l.a, 1));
      }
    };
    auto hline_through = [&](const Point& p, const Point& q) {
      // (a, b, c) = p x q in homogeneous coordinates, gcd-reduced, sign-fixed.
      int128 a = p.y * q.w - q.y * p.w;
      int128 b = q.x * p.w - p.x * q.w;
      int128 c = p.x * q.y - q.x * p.y;
      int128 g = detail::gcd128(detail::gcd128(a, b), c);
      if (g > 1) {
        a /= g;
        b /= g;
        c /= g;
      }
      if (a < 0 || (a == 0 && b < 0) || (a == 0 && b == 0 && c < 0)) {
        a = -a;
        b = -b;
        c = -c;
      }
      return HLine{a, b, c};
    };

    std::unordered_map<HLine, std::vector<int>, HLineHash> groups;
    for (std::size_t i = 0; i < raw.size(); ++i)
      groups[hline_through(soup.points[raw[i].pa], soup.points[raw[i].pb])]
          .push_back(static_cast<int>(i));

    auto cmp_pid = [&](int i, int j) {
      return cmp_xy(soup.points[i], soup.points[j]) < 0;
    };

    std::unordered_map<std::uint64_t, int> seg_ids;
    auto emit = [&](int pa, int pb, int above, int below) {
      std::uint64_t key = (static_cast<std::uint64_t>(pa) << 32) |
                          static_cast<std::uint32_t>(pb);
      auto [it, fresh] = seg_ids.emplace(key, static_cast<int>(soup.segs.size()));
      if (fresh) {
        soup.segs.push_back(Seg{pa, pb, above, below});
        return;
      }
      Seg& sg = soup.segs[static_cast<std::size_t>(it->second)];
      if (above != kNoTriangle) {
        if (sg.above != kNoTriangle && sg.above != above)
          throw OverlapError("two triangles above one edge");
        sg.above = above;
      }
      if (below != kNoTriangle) {
        if (sg.below != kNoTriangle && sg.below != below)
          throw OverlapError("two triangles below one edge");
        sg.below = below;
      }
    };

    for (auto& [line, members] : groups) {
      std::vector<int> ends;
      for (int i : members) {
        ends.push_back(raw[i].pa);
        ends.push_back(raw[i].pb);
      }
      std::sort(ends.begin(), ends.end(), cmp_pid);
      ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
      for (int i : members) {
        auto lo = std::lower_bound(ends.begin(), ends.end(), raw[i].pa, cmp_pid);
        auto hi = std::lower_bound(ends.begin(), ends.end(), raw[i].pb, cmp_pid);
        for (auto it = lo; it != hi; ++it)
          emit(*it, *(it + 1), raw[i].above, raw[i].below);
      }
    }

    soup.vertex_tris.assign(soup.points.size(), {});
    for (const Seg& sg : soup.segs) {
      for (int owner : {sg.above, sg.below}) {
        if (owner == kNoTriangle) continue;
        soup.vertex_tris[sg.pa].push_back(owner);
        soup.vertex_tris[sg.pb].push_back(owner);
      }
    }
    for (auto& v : soup.vertex_tris) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }

    soup.compute_bbox();
    if (check_crossings) soup.check_no_crossings(cmp);
    soup.seg_batch.assign(soup.segs.size(), 0);
    return soup;
  }

  // Batch tag per segment from a per-triangle staging map (lower = earlier).
  void stage_batches(const std::unordered_map<int, int>& tri_batch) {
    seg_batch.assign(segs.size(), std::numeric_limits<int>::max());
    for (std::size_t i = 0; i < segs.size(); ++i) {
      for (int owner : {segs[i].above, segs[i].below}) {
        if (owner == kNoTriangle) continue;
        auto it = tri_batch.find(owner);
        int b = it == tri_batch.end() ? std::numeric_limits<int>::max()
                                      : it->second;
        seg_batch[i] = std::min(seg_batch[i], b);
      }
    }
  }

 private:
  void compute_bbox() {
    bool first = true;
    auto acc = [&](Coord x, Coord y) {
      if (first) {
        min_x = max_x = x;
        min_y = max_y = y;
        first = false;
      } else {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
      }
    };
    for (const Point& p : points) {
      if (p.integral()) {
        acc(static_cast<Coord>(p.x), static_cast<Coord>(p.y));
      } else {
        // floor/ceil of the rational coordinates
        auto fl = [](int128 n, int128 w) {
          int128 q = n / w;
          if (n % w != 0 && ((n < 0) != (w < 0))) --q;
          return static_cast<Coord>(q);
        };
        acc(fl(p.x, p.w), fl(p.y, p.w));
        acc(fl(p.x, p.w) + 1, fl(p.y, p.w) + 1);
      }
    }
  }

  void check_no_crossings(ComparisonCounter& cmp) const {
    struct E {
      Coord x0, x1, y0, y1;
      int id;
    };
    std::vector<E> es;
    es.reserve(segs.size());
    auto fl = [](const Point& p, bool x_axis, bool up) {
      int128 n = x_axis ? p.x : p.y;
      int128 q = n / p.w;
      if (n % p.w != 0) q += up ? 1 : ((n < 0) ? -1 : 0);
      return static_cast<Coord>(q);
    };
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const Point& a = points[segs[i].pa];
      const Point& b = points[segs[i].pb];
      es.push_back(E{std::min(fl(a, true, false), fl(b, true, false)),
                     std::max(fl(a, true, true), fl(b, true, true)),
                     std::min(fl(a, false, false), fl(b, false, false)),
                     std::max(fl(a, false, true), fl(b, false, true)),
                     static_cast<int>(i)});
    }
    std::sort(es.begin(), es.end(),
              [](const E& l, const E& r) { return l.x0 < r.x0; });
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < es.size(); ++i) {
      active.erase(std::remove_if(active.begin(), active.end(),
                                  [&](std::size_t j) {
                                    return es[j].x1 < es[i].x0;
                                  }),
                   active.end());
      for (std::size_t j : active) {
        if (es[j].y1 < es[i].y0 || es[i].y1 < es[j].y0) continue;
        Segment si{points[segs[es[i].id].pa], points[segs[es[i].id].pb]};
        Segment sj{points[segs[es[j].id].pa], points[segs[es[j].id].pb]};
        if (segments_properly_intersect(si, sj, cmp))
          throw OverlapError("triangle edges cross");
      }
      active.push_back(i);
    }
  }
};

class TrapezoidMap {
 public:
  enum class Cover { FULL_BS, SUBSET };

  struct Options {
    Cover cover = Cover::FULL_BS;
    std::uint64_t seed = 0;
    bool enforce_caps = true;  // retry seeds until node/depth caps hold
    int max_attempts = 64;
    bool paranoid = false;  // audit links after every insertion (tests)
  };

  struct Stats {
    std::size_t node_count = 0;
    std::size_t trap_count = 0;
    int max_depth = 0;
    int attempts = 1;
  };

  // Cursor for stepwise search; carries its own comparison counter which the
  // caller merges on finish.
  struct Cursor {
    Point q;
    int node = 0;
    bool resolved = false;
    int answer = kNoTriangle;
    bool on_boundary = false;
    ComparisonCounter cmp;
  };

  TrapezoidMap(const SegmentSoup& soup, const Options& opt,
               ComparisonCounter& build_cmp)
      : soup_(&soup), opt_(opt) {
    std::uint64_t seed = opt.seed;
    for (int attempt = 1;; ++attempt) {
      build(seed, build_cmp);
      stats_.attempts = attempt;
      if (!opt.enforce_caps || caps_ok()) break;
      if (attempt >= opt.max_attempts)
        throw GeometryError("trapezoid map caps not met after retries");
      seed += 0x9e3779b97f4a7c15ULL;
    }
  }

  const Stats& stats() const { return stats_; }

  static std::size_t node_cap(std::size_t triangle_count) {
    return 30 * std::max<std::size_t>(triangle_count, 1) + 30;
  }
  static int depth_cap(std::size_t triangle_count) {
    double m = static_cast<double>(std::max<std::size_t>(triangle_count, 2));
    return static_cast<int>(10.0 * std::log2(m)) + 20;
  }

  Cursor begin(const Point& q) const {
    Cursor c;
    c.q = q;
    c.node = 0;
    return c;
  }

  // One DAG node per step, one comparison unit each; leaves finish with the
  // boundary post-pass (at most two extra units).
  void step(Cursor& c) const {
    if (c.resolved) return;
    const Node& nd = nodes_[static_cast<std::size_t>(c.node)];
    switch (nd.kind) {
      case NodeKind::kPoint: {
        c.cmp.bump();
        c.node = cmp_xy(c.q, soup_->points[static_cast<std::size_t>(nd.index)]) < 0
                     ? nd.left
                     : nd.right;
        return;
      }
      case NodeKind::kSegment: {
        const SegmentSoup::Seg& s = soup_->segs[static_cast<std::size_t>(nd.index)];
        Orientation o = orientation(soup_->points[s.pa], soup_->points[s.pb],
                                    c.q, c.cmp);
        c.node = (o == Orientation::CW) ? nd.right : nd.left;  // on -> above
        return;
      }
      case NodeKind::kLeaf: {
        finalize(c, nd.index);
        return;
      }
    }
  }

  int finish(Cursor& c) const {
    while (!c.resolved) step(c);
    return c.answer;
  }

  int query(const Point& q, ComparisonCounter& cmp, bool* on_boundary = nullptr) const {
    Cursor c = begin(q);
    int ans = finish(c);
    cmp.merge(c.cmp);
    if (on_boundary) *on_boundary = c.on_boundary;
    return ans;
  }

  // Longest root-to-leaf path, in nodes.
  int max_depth() const { return stats_.max_depth; }
  std::size_t node_count() const { return nodes_.size(); }

  // Structure audit used by the tests: neighbor liveness, leaf backlinks,
  // and owner consistency between each trapezoid's top and bottom segments.
  // Wedge trapezoids (zero width at a wall, between edges meeting at a
  // vertex) keep unused pointers across that wall; walks can never exit
  // through the apex point, so those sides are exempt.
  bool audit_links() const {
    for (std::size_t i = 0; i < traps_.size(); ++i) {
      const Trap& t = traps_[i];
      if (!t.alive) continue;
      bool right_wedge = !is_sentinel(t.top) && !is_sentinel(t.bottom) &&
                         seg(t.top).pb == t.rightp && seg(t.bottom).pb == t.rightp;
      bool left_wedge = !is_sentinel(t.top) && !is_sentinel(t.bottom) &&
                        seg(t.top).pa == t.leftp && seg(t.bottom).pa == t.leftp;
      if (!right_wedge)
        for (int nb : {t.ur, t.lr})
          if (nb != -1 && !traps_[static_cast<std::size_t>(nb)].alive) return false;
      if (!left_wedge)
        for (int nb : {t.ul, t.ll})
          if (nb != -1 && !traps_[static_cast<std::size_t>(nb)].alive) return false;
      if (t.node < 0 ||
          nodes_[static_cast<std::size_t>(t.node)].kind != NodeKind::kLeaf ||
          nodes_[static_cast<std::size_t>(t.node)].index != static_cast<int>(i))
        return false;
      if (!is_sentinel(t.top) && !is_sentinel(t.bottom) &&
          seg(t.top).below != seg(t.bottom).above)
        return false;
    }
    return true;
  }

 private:
  enum class NodeKind : std::uint8_t { kPoint, kSegment, kLeaf };

  struct Node {
    NodeKind kind = NodeKind::kLeaf;
    int index = -1;  // point id / segment id / trap id
    int left = -1, right = -1;
  };

  struct Trap {
    int top, bottom;    // segment ids, sentinels allowed
    int leftp, rightp;  // point ids
    int ul = -1, ll = -1, ur = -1, lr = -1;
    int node = -1;
    int owner = kNoTriangle;
    bool alive = true;
  };

  const SegmentSoup* soup_;
  Options opt_;
  Stats stats_;
  std::vector<Node> nodes_;
  std::vector<Trap> traps_;
  int sent_top_ = -1, sent_bot_ = -1;  // sentinel segment ids
  int bl_point_ = -1, tr_point_ = -1;  // bounding-box corner point ids
  std::vector<Point> extra_points_;    // bbox corners live here
  std::vector<SegmentSoup::Seg> extra_segs_;

  const Point& pt(int id) const {
    std::size_t n = soup_->points.size();
    return id < static_cast<int>(n)
               ? soup_->points[static_cast<std::size_t>(id)]
               : extra_points_[static_cast<std::size_t>(id) - n];
  }
  const SegmentSoup::Seg& seg(int id) const {
    std::size_t n = soup_->segs.size();
    return id < static_cast<int>(n)
               ? soup_->segs[static_cast<std::size_t>(id)]
               : extra_segs_[static_cast<std::size_t>(id) - n];
  }
  bool is_sentinel(int seg_id) const {
    return seg_id == sent_top_ || seg_id == sent_bot_;
  }

  int new_trap(int top, int bottom, int leftp, int rightp) {
    traps_.push_back(Trap{top, bottom, leftp, rightp});
    return static_cast<int>(traps_.size()) - 1;
  }

  int leaf_node(int trap_id) {
    Trap& t = traps_[static_cast<std::size_t>(trap_id)];
    if (t.node < 0) {
      nodes_.push_back(Node{NodeKind::kLeaf, trap_id, -1, -1});
      t.node = static_cast<int>(nodes_.size()) - 1;
    }
    return t.node;
  }

  int new_node(NodeKind kind, int index, int left, int right) {
    nodes_.push_back(Node{kind, index, left, right});
    return static_cast<int>(nodes_.size()) - 1;
  }

  static void fix_right_links(std::vector<Trap>& traps, int x, int dead,
                              int repl) {
    if (x < 0) return;
    Trap& t = traps[static_cast<std::size_t>(x)];
    if (t.ur == dead) t.ur = repl;
    if (t.lr == dead) t.lr = repl;
  }
  static void fix_left_links(std::vector<Trap>& traps, int x, int dead,
                             int repl) {
    if (x < 0) return;
    Trap& t = traps[static_cast<std::size_t>(x)];
    if (t.ul == dead) t.ul = repl;
    if (t.ll == dead) t.ll = repl;
  }
  // A single neighbor spanning the whole wall gets its two pointers split
  // between the new upper and lower pieces.
  static void split_right_links(std::vector<Trap>& traps, int x, int dead,
                                int up, int lo) {
    if (x < 0) return;
    Trap& t = traps[static_cast<std::size_t>(x)];
    if (t.ur == dead) t.ur = up;
    if (t.lr == dead) t.lr = lo;
  }
  static void split_left_links(std::vector<Trap>& traps, int x, int dead,
                               int up, int lo) {
    if (x < 0) return;
    Trap& t = traps[static_cast<std::size_t>(x)];
    if (t.ul == dead) t.ul = up;
    if (t.ll == dead) t.ll = lo;
  }

  void build(std::uint64_t seed, ComparisonCounter& cmp) {
    nodes_.clear();
    traps_.clear();
    extra_points_.clear();
    extra_segs_.clear();

    const std::size_t ns = soup_->points.size();
    bl_point_ = static_cast<int>(ns);
    tr_point_ = static_cast<int>(ns + 1);
    extra_points_.emplace_back(soup_->min_x - 2, soup_->min_y - 2);
    extra_points_.emplace_back(soup_->max_x + 2, soup_->max_y + 2);

    const std::size_t es = soup_->segs.size();
    sent_bot_ = static_cast<int>(es);
    sent_top_ = static_cast<int>(es + 1);
    // Sentinel geometry is never compared against; ids only.
    extra_segs_.push_back(SegmentSoup::Seg{bl_point_, tr_point_, kNoTriangle,
                                           kNoTriangle});
    extra_segs_.push_back(SegmentSoup::Seg{bl_point_, tr_point_, kNoTriangle,
                                           kNoTriangle});

    int t0 = new_trap(sent_top_, sent_bot_, bl_point_, tr_point_);
    nodes_.push_back(Node{NodeKind::kLeaf, t0, -1, -1});
    traps_[static_cast<std::size_t>(t0)].node = 0;

    // Stable hot-first staging, shuffled inside each batch.
    std::vector<int> order(soup_->segs.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = static_cast<int>(i);
    SplitMix64 rng(seed);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return soup_->seg_batch[static_cast<std::size_t>(a)] <
             soup_->seg_batch[static_cast<std::size_t>(b)];
    });
    std::size_t run = 0;
    while (run < order.size()) {
      std::size_t end = run;
      while (end < order.size() &&
             soup_->seg_batch[static_cast<std::size_t>(order[end])] ==
                 soup_->seg_batch[static_cast<std::size_t>(order[run])])
        ++end;
      for (std::size_t i = end - 1; i > run; --i) {
        std::size_t j = run + rng.below(i - run + 1);
        std::swap(order[i], order[j]);
      }
      run = end;
    }

    int inserted = 0;
    for (int si : order) {
      insert_segment(si, cmp);
      ++inserted;
      if (opt_.paranoid && !audit_links())
        throw GeometryError("link audit failed after insertion " +
                            std::to_string(inserted) + " (segment " +
                            std::to_string(si) + ")");
    }

    assign_owners();
    compute_stats();
  }

  bool caps_ok() const {
    return nodes_.size() <= node_cap(soup_->triangle_count) &&
           stats_.max_depth <= depth_cap(soup_->triangle_count);
  }

  // Descend with the left endpoint of segment si; ties resolved toward where
  // the segment continues (right at equal points, slope at collinear tests).
  int locate_for_insert(int si, ComparisonCounter& cmp) const {
    const SegmentSoup::Seg& s = seg(si);
    const Point& a = pt(s.pa);
    const Point& b = pt(s.pb);
    int nd = 0;
    while (nodes_[static_cast<std::size_t>(nd)].kind != NodeKind::kLeaf) {
      const Node& n = nodes_[static_cast<std::size_t>(nd)];
      if (n.kind == NodeKind::kPoint) {
        cmp.bump();
        nd = cmp_xy(a, pt(n.index)) < 0 ? n.left : n.right;
      } else {
        const SegmentSoup::Seg& t = seg(n.index);
        Orientation o = orientation(pt(t.pa), pt(t.pb), a, cmp);
        if (o == Orientation::COLLINEAR) {
          o = orientation(pt(t.pa), pt(t.pb), b, cmp);
          if (o == Orientation::COLLINEAR)
            throw OverlapError("collinear overlapping segments in insert");
        }
        nd = (o == Orientation::CCW) ? n.left : n.right;
      }
    }
    return nodes_[static_cast<std::size_t>(nd)].index;
  }

  void insert_segment(int si, ComparisonCounter& cmp) {
    const SegmentSoup::Seg& s = seg(si);
    const int a = s.pa, b = s.pb;
    const Point& pa = pt(a);
    const Point& pb = pt(b);

    // Threaded trapezoids, left to right.
    std::vector<int> thread;
    std::vector<bool> wall_above;  // for each internal wall: rightp above s?
    {
      int cur = locate_for_insert(si, cmp);
      thread.push_back(cur);
      while (cmp_xy(pt(traps_[static_cast<std::size_t>(cur)].rightp), pb) < 0) {
        const Trap& t = traps_[static_cast<std::size_t>(cur)];
        Orientation o = orientation(pa, pb, pt(t.rightp), cmp);
        assert(o != Orientation::COLLINEAR);
        bool above = o == Orientation::CCW;
        wall_above.push_back(above);
        cur = above ? t.lr : t.ur;
        assert(cur >= 0 && traps_[static_cast<std::size_t>(cur)].alive);
        thread.push_back(cur);
      }
    }

    const int k = static_cast<int>(thread.size()) - 1;
    const bool left_cap =
        cmp_xy(pt(traps_[static_cast<std::size_t>(thread[0])].leftp), pa) < 0;
    const bool right_cap =
        cmp_xy(pb, pt(traps_[static_cast<std::size_t>(thread[static_cast<std::size_t>(k)])].rightp)) <
        0;

    int capA = -1, capB = -1;
    int upper = -1, lower = -1;
    std::vector<int> upper_of(thread.size()), lower_of(thread.size());

    for (int j = 0; j <= k; ++j) {
      const int dj = thread[static_cast<std::size_t>(j)];
      Trap d = traps_[static_cast<std::size_t>(dj)];  // copy: we rewrite below

      if (j == 0) {
        if (left_cap) {
          capA = new_trap(d.top, d.bottom, d.leftp, a);
          traps_[static_cast<std::size_t>(capA)].ul = d.ul;
          traps_[static_cast<std::size_t>(capA)].ll = d.ll;
          fix_right_links(traps_, d.ul, dj, capA);
          fix_right_links(traps_, d.ll, dj, capA);
        }
        upper = new_trap(d.top, si, a, -1);
        lower = new_trap(si, d.bottom, a, -1);
        if (left_cap) {
          Trap& A = traps_[static_cast<std::size_t>(capA)];
          A.ur = upper;
          A.lr = lower;
          traps_[static_cast<std::size_t>(upper)].ul = capA;
          traps_[static_cast<std::size_t>(upper)].ll = capA;
          traps_[static_cast<std::size_t>(lower)].ul = capA;
          traps_[static_cast<std::size_t>(lower)].ll = capA;
        } else {
          // s starts exactly at d.leftp
          traps_[static_cast<std::size_t>(upper)].ul = d.ul;
          traps_[static_cast<std::size_t>(upper)].ll = d.ul;
          traps_[static_cast<std::size_t>(lower)].ul = d.ll;
          traps_[static_cast<std::size_t>(lower)].ll = d.ll;
          if (d.ul == d.ll) {
            split_right_links(traps_, d.ul, dj, upper, lower);
          } else {
            fix_right_links(traps_, d.ul, dj, upper);
            fix_right_links(traps_, d.ll, dj, lower);
          }
        }
      } else {
        const bool above = wall_above[static_cast<std::size_t>(j - 1)];
        const int prev = thread[static_cast<std::size_t>(j - 1)];
        const Trap& dprev = traps_[static_cast<std::size_t>(prev)];  // dead copy ok
        if (above) {
          // wall survives above s: close the upper run, open a new one
          const int closed = upper;
          traps_[static_cast<std::size_t>(closed)].rightp = d.leftp;
          upper = new_trap(d.top, si, d.leftp, -1);
          // left neighbors of the new upper piece
          int out_ul = (d.ul == prev) ? closed : d.ul;
          traps_[static_cast<std::size_t>(upper)].ul = out_ul;
          traps_[static_cast<std::size_t>(upper)].ll = closed;
          if (d.ul != prev) fix_right_links(traps_, d.ul, dj, upper);
          // right neighbors of the closed piece
          int out_ur = (dprev.ur == dj) ? upper : dprev.ur;
          traps_[static_cast<std::size_t>(closed)].ur = out_ur;
          traps_[static_cast<std::size_t>(closed)].lr = upper;
          if (dprev.ur != dj) fix_left_links(traps_, dprev.ur, prev, closed);
          // lower continues through: inherit nothing, but lower-left pointers
          // of d belong to the dead wall region below s: they vanish.
        } else {
          const int closed = lower;
          traps_[static_cast<std::size_t>(closed)].rightp = d.leftp;
          lower = new_trap(si, d.bottom, d.leftp, -1);
          int out_ll = (d.ll == prev) ? closed : d.ll;
          traps_[static_cast<std::size_t>(lower)].ll = out_ll;
          traps_[static_cast<std::size_t>(lower)].ul = closed;
          if (d.ll != prev) fix_right_links(traps_, d.ll, dj, lower);
          int out_lr = (dprev.lr == dj) ? lower : dprev.lr;
          traps_[static_cast<std::size_t>(closed)].lr = out_lr;
          traps_[static_cast<std::size_t>(closed)].ur = lower;
          if (dprev.lr != dj) fix_left_links(traps_, dprev.lr, prev, closed);
        }
      }

      upper_of[static_cast<std::size_t>(j)] = upper;
      lower_of[static_cast<std::size_t>(j)] = lower;

      if (j == k) {
        traps_[static_cast<std::size_t>(upper)].rightp = right_cap ? b : d.rightp;
        traps_[static_cast<std::size_t>(lower)].rightp = right_cap ? b : d.rightp;
        if (right_cap) {
          capB = new_trap(d.top, d.bottom, b, d.rightp);
          Trap& B = traps_[static_cast<std::size_t>(capB)];
          B.ur = d.ur;
          B.lr = d.lr;
          fix_left_links(traps_, d.ur, dj, capB);
          fix_left_links(traps_, d.lr, dj, capB);
          B.ul = upper;
          B.ll = lower;
          traps_[static_cast<std::size_t>(upper)].ur = capB;
          traps_[static_cast<std::size_t>(upper)].lr = capB;
          traps_[static_cast<std::size_t>(lower)].ur = capB;
          traps_[static_cast<std::size_t>(lower)].lr = capB;
        } else {
          traps_[static_cast<std::size_t>(upper)].ur = d.ur;
          traps_[static_cast<std::size_t>(upper)].lr = d.ur;
          traps_[static_cast<std::size_t>(lower)].ur = d.lr;
          traps_[static_cast<std::size_t>(lower)].lr = d.lr;
          if (d.ur == d.lr) {
            split_left_links(traps_, d.ur, dj, upper, lower);
          } else {
            fix_left_links(traps_, d.ur, dj, upper);
            fix_left_links(traps_, d.lr, dj, lower);
          }
        }
      }
    }

    // DAG rewiring: overwrite each threaded leaf in place.
    for (int j = 0; j <= k; ++j) {
      const int dj = thread[static_cast<std::size_t>(j)];
      Trap& d = traps_[static_cast<std::size_t>(dj)];
      const int old_leaf = d.node;
      d.alive = false;
      d.node = -1;

      int y = new_node(NodeKind::kSegment, si,
                       leaf_node(upper_of[static_cast<std::size_t>(j)]),
                       leaf_node(lower_of[static_cast<std::size_t>(j)]));
      int sub = y;
      if (j == k && right_cap)
        sub = new_node(NodeKind::kPoint, b, y, leaf_node(capB));
      if (j == 0 && left_cap)
        sub = new_node(NodeKind::kPoint, a, leaf_node(capA), sub);
      // install at the old leaf position so parents see the new subtree;
      // the subtree root is always an inner node created last in this call
      nodes_[static_cast<std::size_t>(old_leaf)] = nodes_[static_cast<std::size_t>(sub)];
      if (static_cast<std::size_t>(sub) == nodes_.size() - 1) nodes_.pop_back();
    }
  }

  void assign_owners() {
    for (Trap& t : traps_) {
      if (!t.alive) continue;
      if (!is_sentinel(t.top)) {
        t.owner = seg(t.top).below;
      } else if (!is_sentinel(t.bottom)) {
        t.owner = seg(t.bottom).above;
      } else {
        t.owner = kNoTriangle;
      }
    }
  }

  void compute_stats() {
    stats_.node_count = nodes_.size();
    stats_.trap_count = 0;
    for (const Trap& t : traps_)
      if (t.alive) ++stats_.trap_count;
    // longest root-to-leaf path via label relaxation
    std::vector<int> depth(nodes_.size(), -1);
    depth[0] = 1;
    stats_.max_depth = 1;
    // BFS relaxation; DAG edges go to arbitrary ids, so iterate to fixpoint
    // via a queue (each node's depth only increases, bounded by node count).
    std::vector<int> queue{0};
    while (!queue.empty()) {
      int nd = queue.back();
      queue.pop_back();
      const Node& n = nodes_[static_cast<std::size_t>(nd)];
      if (n.kind == NodeKind::kLeaf) {
        stats_.max_depth = std::max(stats_.max_depth, depth[static_cast<std::size_t>(nd)]);
        continue;
      }
      for (int ch : {n.left, n.right}) {
        int nd_depth = depth[static_cast<std::size_t>(nd)] + 1;
        if (depth[static_cast<std::size_t>(ch)] < nd_depth) {
          depth[static_cast<std::size_t>(ch)] = nd_depth;
          queue.push_back(ch);
        }
      }
    }
  }

  void finalize(Cursor& c, int trap_id) const {
    const Trap& t = traps_[static_cast<std::size_t>(trap_id)];
    c.resolved = true;

    if (points_equal(c.q, pt(t.leftp))) return resolve_vertex(c, t.leftp);
    if (points_equal(c.q, pt(t.rightp))) return resolve_vertex(c, t.rightp);

    int best = std::numeric_limits<int>::max();
    bool on_edge = false;
    auto consider_seg = [&](int seg_id) {
      if (is_sentinel(seg_id)) return;
      const SegmentSoup::Seg& s = seg(seg_id);
      if (orientation(pt(s.pa), pt(s.pb), c.q, c.cmp) ==
          Orientation::COLLINEAR) {
        on_edge = true;
        for (int owner : {s.above, s.below})
          if (owner != kNoTriangle) best = std::min(best, owner);
      }
    };
    consider_seg(t.top);
    consider_seg(t.bottom);
    if (on_edge) {
      c.on_boundary = true;
      c.answer = best == std::numeric_limits<int>::max() ? kNoTriangle : best;
      return;
    }
    c.answer = t.owner;
  }

  void resolve_vertex(Cursor& c, int point_id) const {
    c.on_boundary = true;
    const auto& inc = point_id < static_cast<int>(soup_->vertex_tris.size())
                          ? soup_->vertex_tris[static_cast<std::size_t>(point_id)]
                          : std::vector<int>{};
    c.answer = inc.empty() ? kNoTriangle : inc.front();  // sorted: min id
  }
};

}  // namespace pointloc
