#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "pointloc/geometry.hpp"

// Parsing, validation and indexing of a convex subdivision, plus the
// enclosing triangle B and its fins.
//
// The file format keeps user coordinates; the library doubles everything at
// parse time so that the two slope-(+/-1) tangent lines of the enclosing
// triangle meet at lattice points.  Bounded regions may contain angle-pi
// vertices (a neighbour's chord endpoint on one of their edges); the outer
// boundary must be strictly convex.

namespace pointloc {

inline constexpr int kExteriorId = -1;
inline constexpr Coord kMaxInputCoord = Coord(1) << 29;

struct ParseError : std::runtime_error {
  int line;
  explicit ParseError(const std::string& what, int line_no)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what),
        line(line_no) {}
};

enum class ValidationCategory {
  NONCONVEX_REGION,
  INCOMPATIBLE_EDGES,
  SELF_INTERSECTION,
  DISCONNECTED,
  NONCONVEX_OUTER,
};

inline const char* to_string(ValidationCategory c) {
  switch (c) {
    case ValidationCategory::NONCONVEX_REGION: return "NONCONVEX_REGION";
    case ValidationCategory::INCOMPATIBLE_EDGES: return "INCOMPATIBLE_EDGES";
    case ValidationCategory::SELF_INTERSECTION: return "SELF_INTERSECTION";
    case ValidationCategory::DISCONNECTED: return "DISCONNECTED";
    case ValidationCategory::NONCONVEX_OUTER: return "NONCONVEX_OUTER";
  }
  return "?";
}

struct ValidationError : std::runtime_error {
  ValidationCategory category;
  ValidationError(ValidationCategory cat, const std::string& what)
      : std::runtime_error(std::string(to_string(cat)) + ": " + what),
        category(cat) {}
};

struct ConvexSubdivision {
  std::vector<Point> vertices;             // scaled (x2), lattice points
  std::vector<std::vector<int>> regions;   // CCW vertex-index cycles
  std::vector<int> outer_cycle;            // CCW, derived by validation

  // edge key -> the one or two incident region ids
  struct EdgeUse {
    int left = kExteriorId;   // region with the edge directed lo->hi
    int right = kExteriorId;  // region with the edge directed hi->lo
  };
  std::unordered_map<std::uint64_t, EdgeUse> edge_index;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int region_count() const { return static_cast<int>(regions.size()); }

  static std::uint64_t edge_key(int u, int v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) |
           static_cast<std::uint32_t>(v);
  }

  // Closed containment in a (weakly) convex CCW region.
  bool region_contains(int region_id, const Point& q,
                       ComparisonCounter& cmp) const {
    const auto& cyc = regions[region_id];
    const std::size_t k = cyc.size();
    for (std::size_t i = 0; i < k; ++i) {
      const Point& a = vertices[cyc[i]];
      const Point& b = vertices[cyc[(i + 1) % k]];
      if (orientation(a, b, q, cmp) == Orientation::CW) return false;
    }
    return true;
  }

  Rational region_area2(int region_id) const {
    const auto& cyc = regions[region_id];
    Rational sum = 0;
    for (std::size_t i = 1; i + 1 < cyc.size(); ++i)
      sum += area2(vertices[cyc[0]], vertices[cyc[i]], vertices[cyc[i + 1]]);
    return sum;
  }
};

namespace detail {

inline bool region_is_weakly_convex_ccw(const std::vector<Point>& pts,
                                        const std::vector<int>& cyc,
                                        ComparisonCounter& cmp) {
  const std::size_t k = cyc.size();
  if (k < 3) return false;
  int strict_turns = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const Point& a = pts[cyc[i]];
    const Point& b = pts[cyc[(i + 1) % k]];
    const Point& c = pts[cyc[(i + 2) % k]];
    if (points_equal(a, b)) return false;
    Orientation o = orientation(a, b, c, cmp);
    if (o == Orientation::CW) return false;
    if (o == Orientation::CCW) {
      ++strict_turns;
    } else {
      // Collinear: forbid reversal spikes, allow straight-through.
      int128 dot = (b.x - a.x) * (c.x - b.x) + (b.y - a.y) * (c.y - b.y);
      if (dot <= 0) return false;
    }
  }
  return strict_turns >= 3;
}

}  // namespace detail

// --- file format -----------------------------------------------------------
//
//   pointloc-subdivision v1
//   vertices <count>
//   <x> <y>            (count lines, pre-scale integers)
//   regions <count>
//   <k> <i1> ... <ik>  (count lines, CCW, 0-based)

inline ConvexSubdivision parse_subdivision(std::istream& in);

inline ConvexSubdivision parse_subdivision(const std::string& text) {
  std::istringstream in(text);
  return parse_subdivision(in);
}

inline void validate_subdivision(ConvexSubdivision& s);

inline ConvexSubdivision parse_subdivision(std::istream& in) {
  ConvexSubdivision s;
  int line_no = 0;
  std::string line;
  auto next_line = [&]() -> std::string {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return line;
    }
    throw ParseError("unexpected end of file", line_no + 1);
  };

  if (next_line() != "pointloc-subdivision v1")
    throw ParseError("bad magic, expected 'pointloc-subdivision v1'", line_no);

  std::istringstream hdr(next_line());
  std::string kw;
  long long count = 0;
  if (!(hdr >> kw >> count) || kw != "vertices" || count < 3)
    throw ParseError("expected 'vertices <count>' with count >= 3", line_no);

  s.vertices.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) {
    std::istringstream ls(next_line());
    long long x, y;
    if (!(ls >> x >> y)) throw ParseError("expected '<x> <y>'", line_no);
    if (std::llabs(x) > kMaxInputCoord || std::llabs(y) > kMaxInputCoord)
      throw ParseError("coordinate magnitude exceeds 2^29", line_no);
    s.vertices.emplace_back(static_cast<Coord>(2 * x),
                            static_cast<Coord>(2 * y));
  }

  std::istringstream rh(next_line());
  if (!(rh >> kw >> count) || kw != "regions" || count < 1)
    throw ParseError("expected 'regions <count>' with count >= 1", line_no);

  s.regions.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) {
    std::istringstream ls(next_line());
    long long k;
    if (!(ls >> k) || k < 3)
      throw ParseError("expected region size >= 3", line_no);
    std::vector<int> cyc;
    cyc.reserve(static_cast<std::size_t>(k));
    for (long long j = 0; j < k; ++j) {
      long long idx;
      if (!(ls >> idx)) throw ParseError("missing vertex index", line_no);
      if (idx < 0 || idx >= static_cast<long long>(s.vertices.size()))
        throw ParseError("vertex index out of range", line_no);
      cyc.push_back(static_cast<int>(idx));
    }
    s.regions.push_back(std::move(cyc));
  }

  validate_subdivision(s);
  return s;
}

inline void serialize_subdivision(const ConvexSubdivision& s,
                                  std::ostream& out) {
  out << "pointloc-subdivision v1\n";
  out << "vertices " << s.vertices.size() << "\n";
  for (const Point& p : s.vertices)
    out << static_cast<long long>(p.x / 2) << " "
        << static_cast<long long>(p.y / 2) << "\n";
  out << "regions " << s.regions.size() << "\n";
  for (const auto& cyc : s.regions) {
    out << cyc.size();
    for (int idx : cyc) out << " " << idx;
    out << "\n";
  }
}

inline void validate_subdivision(ConvexSubdivision& s) {
  ComparisonCounter cmp;

  // Distinct vertex coordinates.
  {
    std::unordered_map<Point, int, PointHash, PointEq> seen;
    for (int i = 0; i < s.vertex_count(); ++i) {
      auto [it, fresh] = seen.emplace(s.vertices[i], i);
      if (!fresh)
        throw ValidationError(ValidationCategory::SELF_INTERSECTION,
                              "duplicate vertex coordinates at indices " +
                                  std::to_string(it->second) + " and " +
                                  std::to_string(i));
    }
  }

  // Per-region shape: weakly convex, CCW, no spikes or repeats.
  for (int r = 0; r < s.region_count(); ++r) {
    const auto& cyc = s.regions[r];
    std::vector<char> used(s.vertices.size(), 0);
    for (int idx : cyc) {
      if (used[idx])
        throw ValidationError(ValidationCategory::NONCONVEX_REGION,
                              "region " + std::to_string(r) +
                                  " repeats vertex " + std::to_string(idx));
      used[idx] = 1;
    }
    if (!detail::region_is_weakly_convex_ccw(s.vertices, cyc, cmp))
      throw ValidationError(
          ValidationCategory::NONCONVEX_REGION,
          "region " + std::to_string(r) + " is not convex CCW");
  }

  // Edge usage: each undirected edge in one or two regions, opposite
  // directions when shared.
  s.edge_index.clear();
  for (int r = 0; r < s.region_count(); ++r) {
    const auto& cyc = s.regions[r];
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      int u = cyc[i], v = cyc[(i + 1) % cyc.size()];
      auto& use = s.edge_index[ConvexSubdivision::edge_key(u, v)];
      int& slot = (u < v) ? use.left : use.right;
      if (slot != kExteriorId)
        throw ValidationError(ValidationCategory::INCOMPATIBLE_EDGES,
                              "edge " + std::to_string(u) + "-" +
                                  std::to_string(v) +
                                  " used twice in the same direction");
      slot = r;
    }
  }

  // No vertex may sit in the interior of an edge (T-junction).  Group edges
  // by support line; within a group, any endpoint strictly между the ends of
  // another edge is a violation.  Vertices off the line cannot interfere.
  {
    struct LineHash {
      std::size_t operator()(const Line& l) const {
        std::size_t h = std::hash<std::int64_t>()(l.a);
        h = h * 1000003u ^ std::hash<std::int64_t>()(l.b);
        h = h * 1000003u ^ std::hash<std::int64_t>()(l.c);
        return h;
      }
    };
    std::unordered_map<Line, std::vector<std::pair<int, int>>, LineHash>
        groups;
    for (const auto& [key, use] : s.edge_index) {
      int u = static_cast<int>(key >> 32);
      int v = static_cast<int>(key & 0xffffffffu);
      groups[line_through(s.vertices[u], s.vertices[v])].emplace_back(u, v);
    }
    for (auto& [line, edges] : groups) {
      if (edges.size() < 2) continue;
      std::vector<int> ends;
      for (auto [u, v] : edges) {
        ends.push_back(u);
        ends.push_back(v);
      }
      std::sort(ends.begin(), ends.end());
      ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
      for (auto [u, v] : edges) {
        const Point& a = s.vertices[u];
        const Point& b = s.vertices[v];
        for (int w : ends) {
          if (w == u || w == v) continue;
          const Point& p = s.vertices[w];
          if (cmp_xy(std::min(a, b, [](const Point& x, const Point& y) {
                       return cmp_xy(x, y) < 0;
                     }),
                     p) < 0 &&
              cmp_xy(p, std::max(a, b, [](const Point& x, const Point& y) {
                       return cmp_xy(x, y) < 0;
                     })) < 0)
            throw ValidationError(ValidationCategory::INCOMPATIBLE_EDGES,
                                  "vertex " + std::to_string(w) +
                                      " lies inside edge " +
                                      std::to_string(u) + "-" +
                                      std::to_string(v));
        }
      }
    }
  }

  // Proper edge crossings.  Interval sweep over x with a y-box prefilter.
  {
    struct E {
      Coord x0, x1, y0, y1;
      int u, v;
    };
    std::vector<E> es;
    es.reserve(s.edge_index.size());
    for (const auto& [key, use] : s.edge_index) {
      int u = static_cast<int>(key >> 32);
      int v = static_cast<int>(key & 0xffffffffu);
      const Point& a = s.vertices[u];
      const Point& b = s.vertices[v];
      es.push_back(E{static_cast<Coord>(std::min(a.x, b.x)),
                     static_cast<Coord>(std::max(a.x, b.x)),
                     static_cast<Coord>(std::min(a.y, b.y)),
                     static_cast<Coord>(std::max(a.y, b.y)), u, v});
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
        Segment si{s.vertices[es[i].u], s.vertices[es[i].v]};
        Segment sj{s.vertices[es[j].u], s.vertices[es[j].v]};
        if (segments_properly_intersect(si, sj, cmp))
          throw ValidationError(ValidationCategory::SELF_INTERSECTION,
                                "edges cross");
      }
      active.push_back(i);
    }
  }

  // Connectivity and simply-connectedness: Euler relation plus a single
  // boundary cycle of odd-degree (count-1) edges.
  {
    long long v_cnt = s.vertex_count();
    long long e_cnt = static_cast<long long>(s.edge_index.size());
    long long f_cnt = s.region_count() + 1;
    if (v_cnt - e_cnt + f_cnt != 2)
      throw ValidationError(ValidationCategory::DISCONNECTED,
                            "Euler relation violated (v-e+f = " +
                                std::to_string(v_cnt - e_cnt + f_cnt) + ")");

    std::unordered_map<int, int> boundary_next;  // u -> v, region side left
    for (const auto& [key, use] : s.edge_index) {
      if (use.left != kExteriorId && use.right != kExteriorId) continue;
      int u = static_cast<int>(key >> 32);
      int v = static_cast<int>(key & 0xffffffffu);
      if (use.right != kExteriorId) std::swap(u, v);  // orient as the region
      if (boundary_next.count(u))
        throw ValidationError(ValidationCategory::DISCONNECTED,
                              "boundary is not a single cycle");
      boundary_next[u] = v;
    }
    if (boundary_next.empty())
      throw ValidationError(ValidationCategory::DISCONNECTED,
                            "no boundary edges");
    s.outer_cycle.clear();
    int start = boundary_next.begin()->first;
    int cur = start;
    do {
      s.outer_cycle.push_back(cur);
      auto it = boundary_next.find(cur);
      if (it == boundary_next.end())
        throw ValidationError(ValidationCategory::DISCONNECTED,
                              "open boundary chain");
      cur = it->second;
    } while (cur != start &&
             s.outer_cycle.size() <= boundary_next.size());
    if (cur != start || s.outer_cycle.size() != boundary_next.size())
      throw ValidationError(ValidationCategory::DISCONNECTED,
                            "boundary splits into several cycles");
  }

  // Outer boundary: convex and CCW.  Straight-angle vertices are allowed
  // (shared-edge refinements put them there); reflex turns and reversal
  // spikes are not.
  {
    const auto& cyc = s.outer_cycle;
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      const Point& a = s.vertices[cyc[i]];
      const Point& b = s.vertices[cyc[(i + 1) % cyc.size()]];
      const Point& c = s.vertices[cyc[(i + 2) % cyc.size()]];
      Orientation o = orientation(a, b, c, cmp);
      if (o == Orientation::CW)
        throw ValidationError(ValidationCategory::NONCONVEX_OUTER,
                              "outer boundary reflex at vertex " +
                                  std::to_string(cyc[(i + 1) % cyc.size()]));
      if (o == Orientation::COLLINEAR) {
        int128 dot = (b.x - a.x) * (c.x - b.x) + (b.y - a.y) * (c.y - b.y);
        if (dot <= 0)
          throw ValidationError(ValidationCategory::NONCONVEX_OUTER,
                                "outer boundary spike at vertex " +
                                    std::to_string(cyc[(i + 1) % cyc.size()]));
      }
    }
  }
}

// --- enclosing triangle and fins -------------------------------------------

// Fixed tangent directions: horizontal below, slope -1 upper-right, slope +1
// upper-left.  Always bounded, and the two slanted tangents meet at a lattice
// point thanks to the x2 input scaling.
struct EnclosingTriangle {
  Point corner_right;  // bottom line  ^ slope -1 line
  Point corner_left;   // bottom line  ^ slope +1 line
  Point corner_top;    // slope -1     ^ slope +1
  Line bottom, upper_right, upper_left;
  // touch chains as index ranges into the outer cycle (inclusive first/last)
  int bottom_first = 0, bottom_last = 0;       // along +x
  int right_first = 0, right_last = 0;         // along CCW hull
  int left_first = 0, left_last = 0;           // along CCW hull

  bool contains(const Point& q, ComparisonCounter& cmp) const {
    return point_in_triangle(q, corner_left, corner_right, corner_top, cmp) !=
           TriSide::OUTSIDE;
  }

  Rational area2_exact() const {
    return area2(corner_left, corner_right, corner_top);
  }
};

// A fin: apex (a corner of B), two straight head sides, reflex tail chain.
// (apex, tail[0], ..., tail.back()) is the CCW boundary of the fin.
struct Fin {
  Point apex;
  std::vector<Point> tail;
  Line head_front;  // line through apex and tail.front()
  Line head_back;   // line through tail.back() and apex
  std::vector<Line> tail_lines;  // support line per tail edge

  int tail_edges() const { return static_cast<int>(tail.size()) - 1; }

  Rational area2_exact() const {
    Rational sum = 0;
    for (std::size_t i = 0; i + 1 < tail.size(); ++i)
      sum += area2(apex, tail[i], tail[i + 1]);
    return sum;
  }
};

inline EnclosingTriangle enclosing_triangle(const ConvexSubdivision& s) {
  const auto& cyc = s.outer_cycle;
  if (cyc.size() < 3)
    throw GeometryError("outer boundary needs at least 3 vertices");
  auto pt = [&](int pos) -> const Point& {
    return s.vertices[cyc[static_cast<std::size_t>(pos) % cyc.size()]];
  };
  const int k = static_cast<int>(cyc.size());

  Coord min_y = 0, max_sum = 0, max_diff = 0;
  for (int i = 0; i < k; ++i) {
    Coord x = static_cast<Coord>(pt(i).x), y = static_cast<Coord>(pt(i).y);
    if (i == 0 || y < min_y) min_y = y;
    if (i == 0 || x + y > max_sum) max_sum = x + y;
    if (i == 0 || y - x > max_diff) max_diff = y - x;
  }

  EnclosingTriangle b;
  b.bottom = Line{0, 1, -min_y};
  b.upper_right = Line{1, 1, -max_sum};
  b.upper_left = Line{1, -1, max_diff};  // normalized form of y-x = max_diff
  b.corner_right = Point(max_sum - min_y, min_y);
  b.corner_left = Point(min_y - max_diff, min_y);
  b.corner_top = Point((max_sum - max_diff) / 2, (max_sum + max_diff) / 2);

  // Touch chains: one or two consecutive hull vertices per tangent line
  // (strict convexity caps collinear runs at two).
  auto on_bottom = [&](int i) { return static_cast<Coord>(pt(i).y) == min_y; };
  auto on_right = [&](int i) {
    return static_cast<Coord>(pt(i).x) + static_cast<Coord>(pt(i).y) == max_sum;
  };
  auto on_left = [&](int i) {
    return static_cast<Coord>(pt(i).y) - static_cast<Coord>(pt(i).x) ==
           max_diff;
  };
  auto find_chain = [&](auto&& pred, int& first, int& last) {
    first = -1;
    for (int i = 0; i < k; ++i) {
      if (pred(i) && !pred((i + k - 1) % k)) {
        first = i;
        break;
      }
    }
    if (first < 0) {  // all vertices satisfy pred: impossible for k >= 3
      throw GeometryError("degenerate outer boundary");
    }
    last = first;
    while (pred((last + 1) % k)) last = (last + 1) % k;
  };
  find_chain(on_bottom, b.bottom_first, b.bottom_last);
  find_chain(on_right, b.right_first, b.right_last);
  find_chain(on_left, b.left_first, b.left_last);
  return b;
}

// Fins partition closure(B) minus S; empty ones are dropped.
inline std::vector<Fin> compute_fins(const ConvexSubdivision& s,
                                     const EnclosingTriangle& b) {
  const auto& cyc = s.outer_cycle;
  const int k = static_cast<int>(cyc.size());
  auto pt = [&](int pos) -> const Point& {
    return s.vertices[cyc[static_cast<std::size_t>(pos) % cyc.size()]];
  };

  std::vector<Fin> fins;
  ComparisonCounter cmp;
  // (apex, ccw-walk from chain_end a to chain_start b): a CCW hull walk from
  // the end of one touch chain to the start of the next runs opposite to the
  // fin's own CCW boundary, so the tail is the reversed walk.  Straight-angle
  // hull vertices are dropped so the tail stays strictly reflex; they end up
  // interior to a merged tail edge, which the locator input splitter handles.
  auto make_fin = [&](const Point& apex, int from, int to, const Line& h_from,
                      const Line& h_to) {
    if (from == to) return;  // tangency point shared, empty fin
    std::vector<Point> walk;
    for (int i = from;; i = (i + 1) % k) {
      walk.push_back(pt(i));
      if (i == to) break;
    }
    Fin f;
    f.apex = apex;
    f.tail.reserve(walk.size());
    for (auto it = walk.rbegin(); it != walk.rend(); ++it) {
      while (f.tail.size() >= 2 &&
             orientation(f.tail[f.tail.size() - 2], f.tail.back(), *it, cmp) ==
                 Orientation::COLLINEAR)
        f.tail.pop_back();
      f.tail.push_back(*it);
    }
    f.head_front = h_to;
    f.head_back = h_from;
    for (std::size_t i = 0; i + 1 < f.tail.size(); ++i)
      f.tail_lines.push_back(line_through(f.tail[i], f.tail[i + 1]));
    fins.push_back(std::move(f));
  };

  // CCW hull order passes bottom chain, then right chain, then left chain.
  make_fin(b.corner_right, b.bottom_last, b.right_first, b.bottom,
           b.upper_right);
  make_fin(b.corner_top, b.right_last, b.left_first, b.upper_right,
           b.upper_left);
  make_fin(b.corner_left, b.left_last, b.bottom_first, b.upper_left, b.bottom);
  return fins;
}

inline Rational subdivision_area2(const ConvexSubdivision& s) {
  Rational sum = 0;
  for (int r = 0; r < s.region_count(); ++r) sum += s.region_area2(r);
  return sum;
}

}  // namespace pointloc
