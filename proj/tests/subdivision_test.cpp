#include <catch2/catch_amalgamated.hpp>
#include <sstream>

#include "pointloc/subdivision.hpp"
#include "test_support.hpp"

using namespace pointloc;

namespace {

const char* kUnitSquare =
    "pointloc-subdivision v1\n"
    "vertices 4\n"
    "0 0\n1 0\n1 1\n0 1\n"
    "regions 1\n"
    "4 0 1 2 3\n";

const char* kTwoSquares =
    "pointloc-subdivision v1\n"
    "vertices 6\n"
    "0 0\n1 0\n2 0\n2 1\n1 1\n0 1\n"
    "regions 2\n"
    "4 0 1 4 5\n"
    "4 1 2 3 4\n";

const char* kTriangleOuter =
    "pointloc-subdivision v1\n"
    "vertices 3\n"
    "0 0\n4 0\n0 4\n"
    "regions 1\n"
    "3 0 1 2\n";

const char* kSquareOuter =
    "pointloc-subdivision v1\n"
    "vertices 4\n"
    "0 0\n2 0\n2 2\n0 2\n"
    "regions 1\n"
    "4 0 1 2 3\n";

}  // namespace

TEST_CASE("parse single unit square") {
  auto s = parse_subdivision(kUnitSquare);
  CHECK(s.region_count() == 1);
  CHECK(s.vertex_count() == 4);
  CHECK(s.vertices[1].x == 2);  // x2 pre-scaling
}

TEST_CASE("parse two squares sharing an edge") {
  auto s = parse_subdivision(kTwoSquares);
  CHECK(s.region_count() == 2);
  CHECK(s.vertex_count() == 6);
  CHECK(s.edge_index.size() == 7);  // shared edge indexed once
  auto use = s.edge_index.at(ConvexSubdivision::edge_key(1, 4));
  CHECK(use.left != kExteriorId);
  CHECK(use.right != kExteriorId);
}

TEST_CASE("overlapping regions rejected as SELF_INTERSECTION") {
  const char* text =
      "pointloc-subdivision v1\n"
      "vertices 7\n"
      "0 0\n4 0\n4 4\n0 4\n2 2\n8 2\n5 6\n"
      "regions 2\n"
      "4 0 1 2 3\n"
      "3 4 5 6\n";
  try {
    parse_subdivision(text);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.category == ValidationCategory::SELF_INTERSECTION);
  }
}

TEST_CASE("nonconvex region rejected") {
  const char* text =
      "pointloc-subdivision v1\n"
      "vertices 4\n"
      "0 0\n4 0\n1 1\n0 4\n"
      "regions 1\n"
      "4 0 1 2 3\n";
  try {
    parse_subdivision(text);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.category == ValidationCategory::NONCONVEX_REGION);
  }
}

TEST_CASE("disconnected input rejected") {
  const char* text =
      "pointloc-subdivision v1\n"
      "vertices 8\n"
      "0 0\n1 0\n1 1\n0 1\n5 5\n6 5\n6 6\n5 6\n"
      "regions 2\n"
      "4 0 1 2 3\n"
      "4 4 5 6 7\n";
  try {
    parse_subdivision(text);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.category == ValidationCategory::DISCONNECTED);
  }
}

TEST_CASE("round trip serialize/parse") {
  auto s = parse_subdivision(kTwoSquares);
  std::ostringstream out;
  serialize_subdivision(s, out);
  auto s2 = parse_subdivision(out.str());
  REQUIRE(s.vertices.size() == s2.vertices.size());
  for (std::size_t i = 0; i < s.vertices.size(); ++i)
    CHECK(points_equal(s.vertices[i], s2.vertices[i]));
  CHECK(s.regions == s2.regions);
  std::ostringstream out2;
  serialize_subdivision(s2, out2);
  CHECK(out.str() == out2.str());
}

TEST_CASE("enclosing triangle of triangle outer boundary") {
  auto s = parse_subdivision(kTriangleOuter);
  auto b = enclosing_triangle(s);
  // tangent lines y=0, x+y=8, y-x=8 on the x2-scaled hull
  CHECK(points_equal(b.corner_left, Point(-8, 0)));
  CHECK(points_equal(b.corner_right, Point(8, 0)));
  CHECK(points_equal(b.corner_top, Point(0, 8)));
  auto fins = compute_fins(s, b);
  REQUIRE(fins.size() == 1);  // two sides tangent along whole edges
  CHECK(fins[0].tail_edges() == 1);
}

TEST_CASE("enclosing triangle of square") {
  auto s = parse_subdivision(kSquareOuter);
  auto b = enclosing_triangle(s);
  CHECK(points_equal(b.corner_left, Point(-4, 0)));
  CHECK(points_equal(b.corner_right, Point(8, 0)));
  CHECK(points_equal(b.corner_top, Point(2, 6)));
  auto fins = compute_fins(s, b);
  REQUIRE(fins.size() == 3);
  for (const auto& f : fins) CHECK(f.tail_edges() == 1);
}

TEST_CASE("area partition: B = S + fins") {
  for (const char* text : {kUnitSquare, kTwoSquares, kTriangleOuter,
                           kSquareOuter}) {
    auto s = parse_subdivision(text);
    auto b = enclosing_triangle(s);
    auto fins = compute_fins(s, b);
    Rational total = subdivision_area2(s);
    for (const auto& f : fins) total += f.area2_exact();
    CHECK(total == b.area2_exact());
  }
}

TEST_CASE("fin boundary is CCW and tails lie on outer edges") {
  auto s = parse_subdivision(kSquareOuter);
  auto b = enclosing_triangle(s);
  auto fins = compute_fins(s, b);
  ComparisonCounter cmp;
  for (const auto& f : fins) {
    REQUIRE(f.tail.size() >= 2);
    CHECK(orientation(f.apex, f.tail.front(), f.tail.back(), cmp) ==
          Orientation::CCW);
    CHECK(f.area2_exact() > 0);
    CHECK(line_side(f.head_front, f.tail.front(), cmp) == 0);
    CHECK(line_side(f.head_front, f.apex, cmp) == 0);
    CHECK(line_side(f.head_back, f.tail.back(), cmp) == 0);
  }
}

TEST_CASE("every outer edge on exactly one fin tail or touch chain") {
  auto s = parse_subdivision(kSquareOuter);
  auto b = enclosing_triangle(s);
  auto fins = compute_fins(s, b);
  std::size_t outer_edges = s.outer_cycle.size();
  std::size_t tail_edges = 0;
  for (const auto& f : fins) tail_edges += f.tail_edges();
  auto chain_len = [&](int first, int last) {
    int k = static_cast<int>(s.outer_cycle.size());
    return (last - first + k) % k;
  };
  std::size_t touch_edges = chain_len(b.bottom_first, b.bottom_last) +
                            chain_len(b.right_first, b.right_last) +
                            chain_len(b.left_first, b.left_last);
  CHECK(tail_edges + touch_edges == outer_edges);
}
