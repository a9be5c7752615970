#include <catch2/catch_amalgamated.hpp>
#include <sstream>

#include "pointloc/canonical.hpp"
#include "test_support.hpp"

using namespace pointloc;

namespace {

std::vector<Point> make_poly(std::initializer_list<std::pair<Coord, Coord>> v) {
  std::vector<Point> out;
  for (auto [x, y] : v) out.emplace_back(x, y);
  return out;
}

Rational fin_area2(const FinTree& t) {
  Rational sum = 0;
  for (std::size_t i = 0; i + 1 < t.tail.size(); ++i)
    sum += area2(t.apex, t.tail[i], t.tail[i + 1]);
  return sum;
}

// A fin for tests: a chain bulging up toward a high apex (the reflex tail of
// the fin), sampled left-to-right from the upper arc of a circle.
Fin synthetic_fin(SplitMix64& rng, int tail_edges, Coord radius) {
  std::vector<Point> chain;
  int n = tail_edges + 1;
  double jitter = 0.04 * rng.unit();
  for (int i = 0; i < n; ++i) {
    double ang = 3.141592653589793 *
                 (0.8 + jitter - (0.6 + jitter) * i / std::max(1, n - 1));
    Coord x = 2 * static_cast<Coord>(radius * std::cos(ang) / 2);
    Coord y = 2 * static_cast<Coord>(radius * std::sin(ang) / 2);
    chain.push_back(Point(x, y));
  }
  ComparisonCounter cmp;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i)
    if (points_equal(chain[i], chain[i + 1]))
      return synthetic_fin(rng, tail_edges, radius + 64);
  // reflex within the CCW fin cycle: consecutive triples turn clockwise
  for (std::size_t i = 0; i + 2 < chain.size(); ++i)
    if (orientation(chain[i], chain[i + 1], chain[i + 2], cmp) !=
        Orientation::CW)
      return synthetic_fin(rng, tail_edges, radius + 64);
  Fin f;
  f.apex = Point(0, 4 * radius);
  f.tail = chain;
  Rational area = 0;
  for (std::size_t i = 0; i + 1 < f.tail.size(); ++i)
    area += area2(f.apex, f.tail[i], f.tail[i + 1]);
  if (area < 0) std::reverse(f.tail.begin(), f.tail.end());
  // apex strictly beyond every tail edge's support line, chain on the other
  // side: the shape is a genuine fin
  for (std::size_t i = 0; i + 1 < f.tail.size(); ++i) {
    Line l = line_through(f.tail[i], f.tail[i + 1]);
    int apex_side = line_side(l, f.apex, cmp);
    if (apex_side == 0) return synthetic_fin(rng, tail_edges, radius + 64);
    for (std::size_t j = 0; j < f.tail.size(); ++j) {
      if (j == i || j == i + 1) continue;
      if (line_side(l, f.tail[j], cmp) != -apex_side)
        return synthetic_fin(rng, tail_edges, radius + 64);
    }
    f.tail_lines.push_back(l);
  }
  f.head_front = line_through(f.apex, f.tail.front());
  f.head_back = line_through(f.tail.back(), f.apex);
  return f;
}

const char* kTwoSquares =
    "pointloc-subdivision v1\n"
    "vertices 6\n"
    "0 0\n1 0\n2 0\n2 1\n1 1\n0 1\n"
    "regions 2\n"
    "4 0 1 4 5\n"
    "4 1 2 3 4\n";

}  // namespace

TEST_CASE("tri_reg square: 2 triangles, 1 level") {
  ComparisonCounter cmp;
  auto rt = tri_reg(make_poly({{0, 0}, {4, 0}, {4, 4}, {0, 4}}), cmp);
  CHECK(rt.triangles.size() == 2);
  CHECK(rt.levels_used == 1);
}

TEST_CASE("tri_reg hexagon: 4 triangles, 2 levels") {
  ComparisonCounter cmp;
  auto rt = tri_reg(
      make_poly({{4, 0}, {12, 0}, {16, 8}, {12, 16}, {4, 16}, {0, 8}}), cmp);
  CHECK(rt.triangles.size() == 4);
  CHECK(rt.levels_used == 2);
}

TEST_CASE("tri_reg k-gon: exactly k-2 triangles, exact tiling") {
  SplitMix64 rng(2024);
  for (int iter = 0; iter < 24; ++iter) {
    auto poly = testutil::random_convex_polygon(rng, 5 + iter * 7, 1 << 16);
    if (poly.size() < 3) continue;
    ComparisonCounter cmp;
    auto rt = tri_reg(poly, cmp);
    CHECK(rt.triangles.size() == poly.size() - 2);
    Rational total = 0;
    for (auto& tr : rt.triangles)
      total += area2(poly[tr[0]], poly[tr[1]], poly[tr[2]]);
    Rational direct = 0;
    for (std::size_t i = 1; i + 1 < poly.size(); ++i)
      direct += area2(poly[0], poly[i], poly[i + 1]);
    CHECK(total == direct);
    CHECK(rt.levels_used <=
          static_cast<int>(std::ceil(std::log2(double(poly.size())))));
  }
}

TEST_CASE("split_fin structure examples") {
  SplitMix64 rng(7);
  auto f1 = synthetic_fin(rng, 1, 1 << 10);
  auto t1 = split_fin(f1);
  CHECK(t1.nodes.size() == 1);
  CHECK(t1.height == 1);

  auto f4 = synthetic_fin(rng, 4, 1 << 10);
  auto t4 = split_fin(f4);
  CHECK(t4.nodes.size() == 4);
  CHECK(t4.height == 3);  // ceil(log2 4)+1

  auto f7 = synthetic_fin(rng, 7, 1 << 10);
  auto t7 = split_fin(f7);
  CHECK(t7.nodes.size() == 7);
  const auto& root = t7.nodes[0];
  REQUIRE(root.left >= 0);
  REQUIRE(root.right >= 0);
  CHECK(t7.nodes[root.left].hi - t7.nodes[root.left].lo == 3);
  CHECK(t7.nodes[root.right].hi - t7.nodes[root.right].lo == 3);
}

TEST_CASE("fin tree invariants over random sizes") {
  SplitMix64 rng(99);
  for (int iter = 0; iter < 40; ++iter) {
    int m = 1 + static_cast<int>(rng.below(40));
    auto fin = synthetic_fin(rng, m, 1 << 14);
    m = fin.tail_edges();
    auto t = split_fin(fin);
    CHECK(t.nodes.size() == static_cast<std::size_t>(m));
    CHECK(t.height <=
          static_cast<int>(std::ceil(std::log2(std::max(2, m)))) + 1);
    Rational nodes_area = 0;
    ComparisonCounter cmp;
    for (const auto& n : t.nodes) {
      Rational a2 = area2(n.apex, n.base_l, n.base_r);
      CHECK(a2 > 0);
      nodes_area += a2;
    }
    CHECK(nodes_area == fin_area2(t));
    std::vector<LayerTriangle> fan;
    tri_fin(t, 0, fan, cmp);
    Rational fan_area = 0;
    for (const auto& lt : fan) fan_area += area2(lt.a, lt.b, lt.c);
    CHECK(fan_area == fin_area2(t));
  }
}

TEST_CASE("tri_fin fan sizes") {
  SplitMix64 rng(5);
  auto fin = synthetic_fin(rng, 1, 1 << 10);
  auto t = split_fin(fin);
  ComparisonCounter cmp;
  std::vector<LayerTriangle> fan;
  tri_fin(t, 0, fan, cmp);
  CHECK(fan.size() == 1);  // single node, no interior base points

  auto fin3 = synthetic_fin(rng, 3, 1 << 10);
  auto t3 = split_fin(fin3);
  const auto& root = t3.nodes[0];
  CHECK(root.base_points.size() == 2);
  std::vector<LayerTriangle> fan3;
  tri_fin(t3, 0, fan3, cmp);
  int root_fans = 0;
  for (auto& lt : fan3)
    if (lt.fin_node == 0) ++root_fans;
  CHECK(root_fans == 3);  // fan count = interior vertices + 1
}

TEST_CASE("build_canonical: area partition and payload audit") {
  auto s = parse_subdivision(kTwoSquares);
  ComparisonCounter cmp;
  auto layer = build_canonical(s, cmp);
  CHECK(layer.area2_total() == layer.enclosing.area2_exact());

  for (const auto& t : layer.tris) {
    if (t.region >= 0) {
      CHECK(s.region_contains(t.region, t.a, cmp));
      CHECK(s.region_contains(t.region, t.b, cmp));
      CHECK(s.region_contains(t.region, t.c, cmp));
    } else {
      CHECK(t.region == kExteriorId);
      CHECK(t.fin >= 0);
      CHECK(t.fin_node >= 0);
    }
  }
  for (const auto& ft : layer.fin_trees) {
    for (const auto& n : ft.nodes) {
      CHECK(line_side(n.base_line, n.base_l, cmp) == 0);
      CHECK(line_side(n.base_line, n.base_r, cmp) == 0);
    }
  }
}

TEST_CASE("region crossing bound: 2*ceil(log2 size)+2") {
  SplitMix64 rng(31337);
  for (int iter = 0; iter < 10; ++iter) {
    auto poly = testutil::random_convex_polygon(rng, 16 + iter * 24, 1 << 16);
    if (poly.size() < 4) continue;
    ComparisonCounter cmp;
    auto rt = tri_reg(poly, cmp);
    std::vector<IndexedTriangle> tris;
    for (auto& tr : rt.triangles)
      tris.push_back(IndexedTriangle{poly[tr[0]], poly[tr[1]], poly[tr[2]],
                                     static_cast<int>(tris.size())});
    const int bound =
        2 * static_cast<int>(std::ceil(std::log2(double(poly.size())))) + 2;
    int done = 0;
    while (done < 300) {
      const auto& t1 = tris[rng.below(tris.size())];
      const auto& t2 = tris[rng.below(tris.size())];
      Point p((t1.a.x + t1.b.x + 2 * t1.c.x) / 4,
              (t1.a.y + t1.b.y + 2 * t1.c.y) / 4);
      Point q((2 * t2.a.x + t2.b.x + t2.c.x) / 4,
              (2 * t2.a.y + t2.b.y + t2.c.y) / 4);
      if (points_equal(p, q)) continue;
      if (testutil::brute_force_locate(tris, p) < 0) continue;
      if (testutil::brute_force_locate(tris, q) < 0) continue;
      int crossed = 0;
      for (const auto& t : tris)
        if (testutil::triangle_crosses_segment(p, q, t)) ++crossed;
      REQUIRE(crossed <= bound);
      ++done;
    }
  }
}

TEST_CASE("fin crossing bound: 4*(log2 m + 2)^2") {
  SplitMix64 rng(777);
  for (int iter = 0; iter < 8; ++iter) {
    int m = 3 + static_cast<int>(rng.below(30));
    auto fin = synthetic_fin(rng, m, 1 << 14);
    m = fin.tail_edges();
    auto t = split_fin(fin);
    ComparisonCounter cmp;
    std::vector<LayerTriangle> fan;
    tri_fin(t, 0, fan, cmp);
    std::vector<IndexedTriangle> tris;
    for (auto& lt : fan)
      tris.push_back(
          IndexedTriangle{lt.a, lt.b, lt.c, static_cast<int>(tris.size())});
    double lg = std::log2(std::max(2.0, double(m)));
    const int bound = static_cast<int>(4.0 * (lg + 2.0) * (lg + 2.0));
    int done = 0;
    int attempts = 0;
    while (done < 150 && attempts < 200000) {
      ++attempts;
      Point p(rng.range(-(1 << 14), 1 << 14), rng.range(-(1 << 15), 1 << 16));
      if (testutil::brute_force_locate(tris, p) < 0) continue;
      Point q(rng.range(-(1 << 14), 1 << 14), rng.range(-(1 << 15), 1 << 16));
      if (points_equal(p, q)) continue;
      if (testutil::brute_force_locate(tris, q) < 0) continue;
      int crossed = 0;
      for (const auto& tri : tris)
        if (testutil::triangle_crosses_segment(p, q, tri)) ++crossed;
      REQUIRE(crossed <= bound);
      ++done;
    }
    REQUIRE(done == 150);
  }
}

TEST_CASE("canonical triangle count is linear in n") {
  auto s = parse_subdivision(kTwoSquares);
  ComparisonCounter cmp;
  auto layer = build_canonical(s, cmp);
  std::size_t n = static_cast<std::size_t>(s.vertex_count());
  CHECK(layer.tris.size() <= 8 * n + 16);
  CHECK(layer.vertex_count <= 3 * n + 8);
}

TEST_CASE("triangles.csv dump schema") {
  auto s = parse_subdivision(kTwoSquares);
  ComparisonCounter cmp;
  auto layer = build_canonical(s, cmp);
  std::ostringstream tris_csv, verts_csv;
  write_triangles_csv(layer, tris_csv, &verts_csv);
  std::string first_line = tris_csv.str().substr(0, tris_csv.str().find('\n'));
  CHECK(first_line == "tri_id,v1,v2,v3,region_id,fin_node_id");
  CHECK(verts_csv.str().rfind("vertex_id,x_num,y_num,w", 0) == 0);
}

TEST_CASE("canonical triangulation feeds the locator cleanly") {
  auto s = parse_subdivision(kTwoSquares);
  ComparisonCounter cmp;
  auto layer = build_canonical(s, cmp);
  std::vector<IndexedTriangle> tris;
  for (auto& lt : layer.tris)
    tris.push_back(
        IndexedTriangle{lt.a, lt.b, lt.c, static_cast<int>(tris.size())});
  auto soup = SegmentSoup::build(tris, cmp, true);
  TrapezoidMap::Options opt;
  TrapezoidMap map(soup, opt, cmp);
  REQUIRE(map.audit_links());
  // sample the bounding box; locator答案 agree with brute force
  SplitMix64 rng(1);
  for (int i = 0; i < 4000; ++i) {
    Point q(rng.range(-10, 14), rng.range(-4, 10));
    ComparisonCounter c2;
    REQUIRE(map.query(q, c2) == testutil::brute_force_locate(tris, q));
  }
}
