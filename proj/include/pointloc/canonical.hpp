#pragma once

#include <array>
#include <cassert>
#include <ostream>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pointloc/subdivision.hpp"

// Canonical triangulation: Dobkin-Kirkpatrick alternate-vertex peeling for
// bounded regions, hierarchical middle-edge splitting for fins.
//
// Splitting a fin along the support line of its middle tail edge creates the
// two crossing points on the head sides; those are intersections of integer
// lines and stay in homogeneous form.  Crossing points created by descendant
// cuts land on an ancestor's base segment and are registered there so that
// the ancestor's fan uses them (the base of a triangular region collects
// O(log) vertices).

namespace pointloc {

inline constexpr int kNoRegion = -2;  // payload of gap-filling triangles

struct LayerTriangle {
  Point a, b, c;  // CCW
  int region = kNoRegion;  // region id of S_11; kExteriorId for fin triangles
  int fin = -1;            // index into the layer's fin trees
  int fin_node = -1;
  int peel_level = -1;     // TriReg level for bounded-region triangles
};

// --- TriReg -----------------------------------------------------------------

struct RegionTriangulation {
  std::vector<std::array<int, 3>> triangles;  // indices into the region cycle
  std::vector<int> levels;                    // peel level per triangle
  int levels_used = 0;
};

// Alternate-vertex peeling.  Even positions survive to the next round (for an
// odd count the last pick is cyclically adjacent to the first, which the
// construction allows).  Straight-angle vertices yield zero-area ears, which
// are skipped; the tiling is unaffected.
inline RegionTriangulation tri_reg(const std::vector<Point>& poly,
                                   ComparisonCounter& cmp) {
  RegionTriangulation out;
  const int k = static_cast<int>(poly.size());
  if (k < 3) return out;
  std::vector<int> cur(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) cur[static_cast<std::size_t>(i)] = i;

  int level = 1;
  for (;;) {
    const int m = static_cast<int>(cur.size());
    if (m < 3) break;
    if (m == 3) {
      if (orientation(poly[cur[0]], poly[cur[1]], poly[cur[2]], cmp) ==
          Orientation::CCW) {
        out.triangles.push_back({cur[0], cur[1], cur[2]});
        out.levels.push_back(level);
      }
      out.levels_used = level;
      break;
    }
    std::vector<int> picks;
    picks.reserve(static_cast<std::size_t>(m + 1) / 2);
    for (int j = 0; j < m; j += 2) picks.push_back(cur[static_cast<std::size_t>(j)]);
    for (int j = 1; j < m; j += 2) {
      int a = cur[static_cast<std::size_t>(j - 1)];
      int b = cur[static_cast<std::size_t>(j)];
      int c = cur[static_cast<std::size_t>((j + 1) % m)];
      if (orientation(poly[a], poly[b], poly[c], cmp) == Orientation::CCW) {
        out.triangles.push_back({a, b, c});
        out.levels.push_back(level);
      }
    }
    out.levels_used = level;
    ++level;
    cur = std::move(picks);
    if (cur.size() >= 3) {
      // stop if the survivors went flat (possible with straight angles)
      bool flat = true;
      for (std::size_t j = 0; j < cur.size() && flat; ++j) {
        if (orientation(poly[cur[j]], poly[cur[(j + 1) % cur.size()]],
                        poly[cur[(j + 2) % cur.size()]],
                        cmp) != Orientation::COLLINEAR)
          flat = false;
      }
      if (flat) break;
    }
  }
  return out;
}

// --- SplitFin / TriFin -------------------------------------------------------

struct FinTreeNode {
  int lo = 0, hi = 0;  // tail edge range [lo, hi)
  int mid = 0;         // cut edge (the node's base edge on the hull)
  Point apex, base_l, base_r;
  Line base_line;
  int parent = -1, left = -1, right = -1;
  int depth = 0;
  std::vector<Point> base_points;  // interior fan points, sorted at finalize
};

struct FinTree {
  Point apex;
  std::vector<Point> tail;
  std::vector<Line> tail_lines;
  Line head_front, head_back;
  std::vector<FinTreeNode> nodes;  // node 0 = root
  int height = 0;

  int tail_edge_count() const { return static_cast<int>(tail.size()) - 1; }

  bool marks_ancestor_closed(const std::vector<char>& marked) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (marked[i] && nodes[i].parent >= 0 && !marked[static_cast<std::size_t>(nodes[i].parent)])
        return false;
    return true;
  }
};

namespace detail {

inline int split_fin_build(FinTree& t, int parent, int depth, const Point& apex,
                           int lo, int hi, const Line& front_line,
                           int front_owner, const Line& back_line,
                           int back_owner) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  {
    FinTreeNode& n = t.nodes.back();
    n.parent = parent;
    n.depth = depth;
    n.lo = lo;
    n.hi = hi;
    n.apex = apex;
  }
  t.height = std::max(t.height, depth + 1);

  if (hi - lo == 1) {
    FinTreeNode& n = t.nodes[static_cast<std::size_t>(id)];
    n.mid = lo;
    n.base_l = t.tail[static_cast<std::size_t>(lo)];
    n.base_r = t.tail[static_cast<std::size_t>(lo + 1)];
    n.base_line = t.tail_lines[static_cast<std::size_t>(lo)];
    return id;
  }

  const int mid = lo + (hi - lo) / 2;
  const Line cut = t.tail_lines[static_cast<std::size_t>(mid)];
  Point p1 = (mid == lo) ? t.tail[static_cast<std::size_t>(lo)]
                         : line_intersection(cut, front_line);
  Point p2 = (mid + 1 == hi) ? t.tail[static_cast<std::size_t>(hi)]
                             : line_intersection(cut, back_line);

  auto register_point = [&](int owner, const Point& p) {
    if (owner >= 0)
      t.nodes[static_cast<std::size_t>(owner)].base_points.push_back(p);
  };
  register_point(front_owner, p1);
  register_point(back_owner, p2);

  {
    FinTreeNode& n = t.nodes[static_cast<std::size_t>(id)];
    n.mid = mid;
    n.base_l = p1;
    n.base_r = p2;
    n.base_line = cut;
    n.base_points.push_back(t.tail[static_cast<std::size_t>(mid)]);
    n.base_points.push_back(t.tail[static_cast<std::size_t>(mid + 1)]);
  }

  int left = -1, right = -1;
  if (mid > lo)
    left = split_fin_build(t, id, depth + 1, p1, lo, mid, front_line,
                           front_owner, cut, id);
  if (mid + 1 < hi)
    right = split_fin_build(t, id, depth + 1, p2, mid + 1, hi, cut, id,
                            back_line, back_owner);
  t.nodes[static_cast<std::size_t>(id)].left = left;
  t.nodes[static_cast<std::size_t>(id)].right = right;
  return id;
}

}  // namespace detail

// Recursive middle-edge decomposition; one node per tail edge.
inline FinTree split_fin(const Fin& fin) {
  FinTree t;
  t.apex = fin.apex;
  t.tail = fin.tail;
  t.tail_lines = fin.tail_lines;
  t.head_front = fin.head_front;
  t.head_back = fin.head_back;
  if (fin.tail_edges() < 1) throw GeometryError("fin without tail edges");
  detail::split_fin_build(t, -1, 0, fin.apex, 0, fin.tail_edges(),
                          fin.head_front, -1, fin.head_back, -1);

  for (FinTreeNode& n : t.nodes) {
    auto& pts = n.base_points;
    std::sort(pts.begin(), pts.end(),
              [](const Point& a, const Point& b) { return cmp_xy(a, b) < 0; });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Point& a, const Point& b) {
                            return points_equal(a, b);
                          }),
              pts.end());
    std::erase_if(pts, [&](const Point& p) {
      return points_equal(p, n.base_l) || points_equal(p, n.base_r);
    });
    // keep them ordered from base_l to base_r
    if (cmp_xy(n.base_l, n.base_r) > 0) std::reverse(pts.begin(), pts.end());
  }
  return t;
}

// Fan every node's triangular region from its apex across the base points.
inline void tri_fin(const FinTree& t, int fin_index,
                    std::vector<LayerTriangle>& out, ComparisonCounter& cmp) {
  for (std::size_t ni = 0; ni < t.nodes.size(); ++ni) {
    const FinTreeNode& n = t.nodes[ni];
    std::vector<const Point*> base;
    base.reserve(n.base_points.size() + 2);
    base.push_back(&n.base_l);
    for (const Point& p : n.base_points) base.push_back(&p);
    base.push_back(&n.base_r);
    for (std::size_t i = 0; i + 1 < base.size(); ++i) {
      LayerTriangle lt;
      lt.a = n.apex;
      lt.b = *base[i];
      lt.c = *base[i + 1];
      if (orientation(lt.a, lt.b, lt.c, cmp) != Orientation::CCW) {
        assert(false && "fin fan triangle not CCW");
        std::swap(lt.b, lt.c);
      }
      lt.region = kExteriorId;
      lt.fin = fin_index;
      lt.fin_node = static_cast<int>(ni);
      out.push_back(std::move(lt));
    }
  }
}

// --- layer triangulation ------------------------------------------------------

struct LayerTriangulation {
  std::vector<LayerTriangle> tris;
  std::vector<FinTree> fin_trees;
  EnclosingTriangle enclosing;
  std::size_t vertex_count = 0;

  Rational area2_total() const {
    Rational sum = 0;
    for (const auto& t : tris) sum += area2(t.a, t.b, t.c);
    return sum;
  }

  void compute_vertex_count() {
    std::unordered_set<Point, PointHash, PointEq> set;
    for (const auto& t : tris) {
      set.insert(t.a.normalized());
      set.insert(t.b.normalized());
      set.insert(t.c.normalized());
    }
    vertex_count = set.size();
  }
};

// Delta_11: regions in id order first (lowest triangle id follows lowest
// region id, which makes the locator's boundary tie-break match the
// region-level convention), then the fins.
inline LayerTriangulation build_canonical(const ConvexSubdivision& s,
                                          ComparisonCounter& cmp) {
  LayerTriangulation layer;
  layer.enclosing = enclosing_triangle(s);

  for (int r = 0; r < s.region_count(); ++r) {
    std::vector<Point> poly;
    poly.reserve(s.regions[static_cast<std::size_t>(r)].size());
    for (int idx : s.regions[static_cast<std::size_t>(r)])
      poly.push_back(s.vertices[static_cast<std::size_t>(idx)]);
    RegionTriangulation rt = tri_reg(poly, cmp);
    for (std::size_t i = 0; i < rt.triangles.size(); ++i) {
      LayerTriangle lt;
      lt.a = poly[static_cast<std::size_t>(rt.triangles[i][0])];
      lt.b = poly[static_cast<std::size_t>(rt.triangles[i][1])];
      lt.c = poly[static_cast<std::size_t>(rt.triangles[i][2])];
      lt.region = r;
      lt.peel_level = rt.levels[i];
      layer.tris.push_back(std::move(lt));
    }
  }

  for (const Fin& fin : compute_fins(s, layer.enclosing)) {
    FinTree t = split_fin(fin);
    int fin_index = static_cast<int>(layer.fin_trees.size());
    layer.fin_trees.push_back(std::move(t));
    tri_fin(layer.fin_trees.back(), fin_index, layer.tris, cmp);
  }

  layer.compute_vertex_count();
  return layer;
}

// Debug dump: one row per triangle, vertex ids into a shared vertex table.
inline void write_triangles_csv(const LayerTriangulation& layer,
                                std::ostream& tris_out,
                                std::ostream* vertices_out = nullptr) {
  std::unordered_map<Point, int, PointHash, PointEq> ids;
  std::vector<Point> table;
  auto vid = [&](const Point& p) {
    auto [it, fresh] = ids.emplace(p.normalized(), static_cast<int>(table.size()));
    if (fresh) table.push_back(p.normalized());
    return it->second;
  };
  tris_out << "tri_id,v1,v2,v3,region_id,fin_node_id\n";
  for (std::size_t i = 0; i < layer.tris.size(); ++i) {
    const LayerTriangle& t = layer.tris[i];
    tris_out << i << "," << vid(t.a) << "," << vid(t.b) << "," << vid(t.c)
             << "," << t.region << "," << t.fin_node << "\n";
  }
  if (vertices_out) {
    *vertices_out << "vertex_id,x_num,y_num,w\n";
    for (std::size_t i = 0; i < table.size(); ++i)
      *vertices_out << i << "," << to_string(table[i].x) << ","
                    << to_string(table[i].y) << "," << to_string(table[i].w)
                    << "\n";
  }
}

}  // namespace pointloc
