#pragma once

#include <vector>

#include "pointloc/geometry.hpp"
#include "pointloc/rng.hpp"
#include "pointloc/trapezoid_map.hpp"

// Test-side oracles, kept independent of the library's search paths.

namespace testutil {

using namespace pointloc;

// Arbitrary-precision orientation, written against cpp_int directly.
inline int orientation_oracle(const Point& p, const Point& q, const Point& r) {
  auto big = [](int128 v) { return detail::widen(v).convert_to<BigInt>(); };
  BigInt x1 = big(p.x), y1 = big(p.y), w1 = big(p.w);
  BigInt x2 = big(q.x), y2 = big(q.y), w2 = big(q.w);
  BigInt x3 = big(r.x), y3 = big(r.y), w3 = big(r.w);
  BigInt det =
      x1 * (y2 * w3 - y3 * w2) - y1 * (x2 * w3 - x3 * w2) + w1 * (x2 * y3 - x3 * y2);
  return det > 0 ? 1 : (det < 0 ? -1 : 0);
}

// Lowest triangle id whose closed region contains q; -1 if none.
inline int brute_force_locate(const std::vector<IndexedTriangle>& tris,
                              const Point& q) {
  ComparisonCounter cmp;
  int best = -1;
  for (const auto& t : tris) {
    if (point_in_triangle(q, t.a, t.b, t.c, cmp) != TriSide::OUTSIDE) {
      if (best == -1 || t.id < best) best = t.id;
    }
  }
  return best;
}

// Convex polygon with even lattice coordinates (so midpoints stay integral):
// hull of points on a circle of radius r, deduplicated.
inline std::vector<Point> random_convex_polygon(SplitMix64& rng, int target,
                                                Coord radius) {
  std::vector<std::pair<Coord, Coord>> pts;
  for (int i = 0; i < target * 3; ++i) {
    double ang = rng.unit() * 6.283185307179586;
    Coord x = 2 * static_cast<Coord>(radius * std::cos(ang) / 2);
    Coord y = 2 * static_cast<Coord>(radius * std::sin(ang) / 2);
    pts.emplace_back(x, y);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  // monotone chain
  auto cross = [](std::pair<Coord, Coord> o, std::pair<Coord, Coord> a,
                  std::pair<Coord, Coord> b) {
    return static_cast<int128>(a.first - o.first) * (b.second - o.second) -
           static_cast<int128>(a.second - o.second) * (b.first - o.first);
  };
  std::vector<std::pair<Coord, Coord>> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2 &&
           cross(hull[hull.size() - 2], hull.back(), p) <= 0)
      hull.pop_back();
    hull.push_back(p);
  }
  std::size_t lower = hull.size() + 1;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
    while (hull.size() >= lower &&
           cross(hull[hull.size() - 2], hull.back(), *it) <= 0)
      hull.pop_back();
    hull.push_back(*it);
  }
  hull.pop_back();
  std::vector<Point> out;
  for (auto [x, y] : hull) out.emplace_back(x, y);
  return out;
}

// Fan triangulation of a convex polygon; a valid interior-disjoint tiling.
inline std::vector<IndexedTriangle> fan_triangulate(
    const std::vector<Point>& poly) {
  std::vector<IndexedTriangle> tris;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i)
    tris.push_back(IndexedTriangle{poly[0], poly[i], poly[i + 1],
                                   static_cast<int>(tris.size())});
  return tris;
}

// Exact proper-intersection test between a closed triangle and an open
// segment interior: true iff open(t) meets open(ab).
inline bool triangle_crosses_segment(const Point& a, const Point& b,
                                     const IndexedTriangle& t) {
  ComparisonCounter cmp;
  // Any interior endpoint does it.
  if (point_in_triangle(a, t.a, t.b, t.c, cmp) == TriSide::INSIDE) return true;
  if (point_in_triangle(b, t.a, t.b, t.c, cmp) == TriSide::INSIDE) return true;
  // Otherwise the open segment must properly cross an edge, or pass through
  // the triangle between two boundary points.  Check proper edge crossings
  // first, then the midpoint-inside fallback via rational arithmetic.
  const Point* v[3] = {&t.a, &t.b, &t.c};
  for (int e = 0; e < 3; ++e) {
    Segment edge{*v[e], *v[(e + 1) % 3]};
    if (segments_properly_intersect(Segment{a, b}, edge, cmp)) return true;
  }
  // Midpoint test in rationals: strictly inside all three edges.
  Rational mx = (a.rx() + b.rx()) / 2;
  Rational my = (a.ry() + b.ry()) / 2;
  for (int e = 0; e < 3; ++e) {
    const Point& p = *v[e];
    const Point& q = *v[(e + 1) % 3];
    Rational side = (q.rx() - p.rx()) * (my - p.ry()) -
                    (q.ry() - p.ry()) * (mx - p.rx());
    if (side <= 0) return false;
  }
  return true;
}

}  // namespace testutil
