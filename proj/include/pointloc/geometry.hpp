#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

// Exact planar primitives under the point-line comparison model.
//
// All coordinates are integers after parse-time scaling.  Vertices created by
// cutting fins along support lines are intersections of two integer lines and
// are kept in homogeneous form (x, y, w) with w > 0.  Lines always pass
// through two integer points, so homogeneous coordinates stay within fixed
// bounds (|x|,|y| < 2^95, |w| < 2^64) and every predicate is evaluated
// exactly: a 128-bit fast path when all weights are 1, a 512-bit path
// otherwise.

namespace pointloc {

using Coord = std::int64_t;
using int128 = __int128;
using boost::multiprecision::int512_t;
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Cost metric: one unit per orientation/side evaluation.  Monotone.
struct ComparisonCounter {
  std::uint64_t count = 0;
  void bump() noexcept { ++count; }
  void merge(const ComparisonCounter& other) noexcept { count += other.count; }
};

enum class Orientation : int { CW = -1, COLLINEAR = 0, CCW = 1 };

inline Orientation flip(Orientation o) {
  return static_cast<Orientation>(-static_cast<int>(o));
}

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateTriangle : GeometryError {
  using GeometryError::GeometryError;
};
struct DegenerateSegment : GeometryError {
  using GeometryError::GeometryError;
};

namespace detail {

inline int sign_of(int128 v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

inline int sign_of(const int512_t& v) {
  return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

inline int512_t widen(int128 v) {
  bool neg = v < 0;
  unsigned __int128 m = neg ? -static_cast<unsigned __int128>(v)
                            : static_cast<unsigned __int128>(v);
  int512_t r = static_cast<std::uint64_t>(m >> 64);
  r <<= 64;
  r += static_cast<std::uint64_t>(m);
  return neg ? int512_t(-r) : r;
}

inline int128 gcd128(int128 a, int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace detail

// Homogeneous point; w == 1 for lattice points, w > 0 always.
struct Point {
  int128 x = 0;
  int128 y = 0;
  int128 w = 1;

  Point() = default;
  Point(Coord px, Coord py) : x(px), y(py), w(1) {}
  Point(int128 px, int128 py, int128 pw) : x(px), y(py), w(pw) {
    if (w < 0) {
      x = -x;
      y = -y;
      w = -w;
    }
  }

  bool integral() const { return w == 1; }

  // Reduced by gcd so equal points have identical representation.
  Point normalized() const {
    int128 g = detail::gcd128(detail::gcd128(x, y), w);
    if (g == 0 || g == 1) return *this;
    return Point(x / g, y / g, w / g);
  }

  Rational rx() const {
    return Rational(detail::widen(x).convert_to<BigInt>(),
                    detail::widen(w).convert_to<BigInt>());
  }
  Rational ry() const {
    return Rational(detail::widen(y).convert_to<BigInt>(),
                    detail::widen(w).convert_to<BigInt>());
  }
};

inline bool points_equal(const Point& a, const Point& b) {
  if (a.w == b.w) return a.x == b.x && a.y == b.y;
  if (a.integral() && b.integral()) return false;
  using detail::widen;
  return widen(a.x) * widen(b.w) == widen(b.x) * widen(a.w) &&
         widen(a.y) * widen(b.w) == widen(b.y) * widen(a.w);
}

// Lexicographic (x, y) order on the underlying rationals.  This simulates an
// infinitesimal shear x' = x + eps*y, which removes vertical degeneracies in
// the trapezoid decomposition.  Not counted: ordering primitive, not a
// point-line test (callers that model it as one bump the counter themselves).
inline int cmp_xy(const Point& a, const Point& b) {
  if (a.integral() && b.integral()) {
    if (a.x != b.x) return a.x < b.x ? -1 : 1;
    if (a.y != b.y) return a.y < b.y ? -1 : 1;
    return 0;
  }
  using detail::widen;
  int512_t lhs = widen(a.x) * widen(b.w);
  int512_t rhs = widen(b.x) * widen(a.w);
  if (lhs != rhs) return lhs < rhs ? -1 : 1;
  lhs = widen(a.y) * widen(b.w);
  rhs = widen(b.y) * widen(a.w);
  if (lhs != rhs) return lhs < rhs ? -1 : 1;
  return 0;
}

// Sign of det(q - p, r - p), exact.  One comparison unit.
inline Orientation orientation(const Point& p, const Point& q, const Point& r,
                               ComparisonCounter& cmp) {
  cmp.bump();
  if (p.integral() && q.integral() && r.integral()) {
    int128 d = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    return static_cast<Orientation>(detail::sign_of(d));
  }
  using detail::widen;
  int512_t x1 = widen(p.x), y1 = widen(p.y), w1 = widen(p.w);
  int512_t x2 = widen(q.x), y2 = widen(q.y), w2 = widen(q.w);
  int512_t x3 = widen(r.x), y3 = widen(r.y), w3 = widen(r.w);
  int512_t det = x1 * (y2 * w3 - y3 * w2) - y1 * (x2 * w3 - x3 * w2) +
                 w1 * (x2 * y3 - x3 * y2);
  // w's are positive, so the determinant sign is the orientation sign.
  return static_cast<Orientation>(detail::sign_of(det));
}

enum class TriSide { INSIDE, ON_BOUNDARY, OUTSIDE };

// Classification against the closed triangle (a, b, c) in CCW order.
// Short-circuits, so it spends at most 3 orientation calls.
inline TriSide point_in_triangle(const Point& q, const Point& a,
                                 const Point& b, const Point& c,
                                 ComparisonCounter& cmp) {
  Orientation o1 = orientation(a, b, q, cmp);
  if (o1 == Orientation::CW) return TriSide::OUTSIDE;
  Orientation o2 = orientation(b, c, q, cmp);
  if (o2 == Orientation::CW) return TriSide::OUTSIDE;
  Orientation o3 = orientation(c, a, q, cmp);
  if (o3 == Orientation::CW) return TriSide::OUTSIDE;
  if (o1 == Orientation::COLLINEAR || o2 == Orientation::COLLINEAR ||
      o3 == Orientation::COLLINEAR)
    return TriSide::ON_BOUNDARY;
  return TriSide::INSIDE;
}

struct Segment {
  Point a, b;
};

// q on the closed segment [a, b]?  Collinearity plus a box test.
inline bool point_on_segment(const Point& q, const Point& a, const Point& b,
                             ComparisonCounter& cmp) {
  if (orientation(a, b, q, cmp) != Orientation::COLLINEAR) return false;
  int lo = cmp_xy(a, b) <= 0 ? cmp_xy(a, q) : cmp_xy(b, q);
  int hi = cmp_xy(a, b) <= 0 ? cmp_xy(q, b) : cmp_xy(q, a);
  return lo <= 0 && hi <= 0;
}

// True iff the interiors meet: a transversal crossing or a positive-length
// collinear overlap.  Shared endpoints and touches do not count.
inline bool segments_properly_intersect(const Segment& s, const Segment& t,
                                        ComparisonCounter& cmp) {
  if (points_equal(s.a, s.b)) throw DegenerateSegment("zero-length segment");
  if (points_equal(t.a, t.b)) throw DegenerateSegment("zero-length segment");
  int o1 = static_cast<int>(orientation(s.a, s.b, t.a, cmp));
  int o2 = static_cast<int>(orientation(s.a, s.b, t.b, cmp));
  if (o1 * o2 > 0) return false;
  int o3 = static_cast<int>(orientation(t.a, t.b, s.a, cmp));
  int o4 = static_cast<int>(orientation(t.a, t.b, s.b, cmp));
  if (o3 * o4 > 0) return false;
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && o2 == 0) {
    // Collinear: proper iff the open intervals overlap in the xy-order.
    const Point& slo = cmp_xy(s.a, s.b) <= 0 ? s.a : s.b;
    const Point& shi = cmp_xy(s.a, s.b) <= 0 ? s.b : s.a;
    const Point& tlo = cmp_xy(t.a, t.b) <= 0 ? t.a : t.b;
    const Point& thi = cmp_xy(t.a, t.b) <= 0 ? t.b : t.a;
    const Point& lo = cmp_xy(slo, tlo) >= 0 ? slo : tlo;
    const Point& hi = cmp_xy(shi, thi) <= 0 ? shi : thi;
    return cmp_xy(lo, hi) < 0;
  }
  return false;
}

// Integer line a*x + b*y + c = 0 through two lattice points, normalized so
// that equal lines compare equal. a,b fit in 33 bits and c in 63 bits.
struct Line {
  std::int64_t a = 0, b = 0, c = 0;

  friend bool operator==(const Line& l, const Line& r) {
    return l.a == r.a && l.b == r.b && l.c == r.c;
  }
};

inline Line line_through(const Point& p, const Point& q) {
  if (!p.integral() || !q.integral())
    throw GeometryError("line_through requires lattice points");
  std::int64_t a = static_cast<std::int64_t>(p.y - q.y);
  std::int64_t b = static_cast<std::int64_t>(q.x - p.x);
  if (a == 0 && b == 0) throw DegenerateSegment("line through equal points");
  int128 c128 = static_cast<int128>(p.x) * q.y - static_cast<int128>(q.x) * p.y;
  std::int64_t c = static_cast<std::int64_t>(c128);
  std::int64_t g = std::llabs(a);
  auto gcd64 = [](std::int64_t u, std::int64_t v) {
    u = std::llabs(u);
    v = std::llabs(v);
    while (v) {
      std::int64_t t = u % v;
      u = v;
      v = t;
    }
    return u;
  };
  g = gcd64(gcd64(a, b), c);
  if (g > 1) {
    a /= g;
    b /= g;
    c /= g;
  }
  if (a < 0 || (a == 0 && b < 0)) {
    a = -a;
    b = -b;
    c = -c;
  }
  return Line{a, b, c};
}

inline int line_side(const Line& l, const Point& p, ComparisonCounter& cmp) {
  cmp.bump();
  if (p.integral()) {
    int128 v = static_cast<int128>(l.a) * p.x + static_cast<int128>(l.b) * p.y +
               l.c;
    return detail::sign_of(v);
  }
  using detail::widen;
  int512_t v = widen(static_cast<int128>(l.a)) * widen(p.x) +
               widen(static_cast<int128>(l.b)) * widen(p.y) +
               widen(static_cast<int128>(l.c)) * widen(p.w);
  return detail::sign_of(v);
}

// Homogeneous intersection of two lines.  Throws on parallel input.
inline Point line_intersection(const Line& l, const Line& m) {
  int128 w = static_cast<int128>(l.a) * m.b - static_cast<int128>(m.a) * l.b;
  if (w == 0) throw GeometryError("parallel lines");
  int128 x = static_cast<int128>(l.b) * m.c - static_cast<int128>(m.b) * l.c;
  int128 y = static_cast<int128>(l.c) * m.a - static_cast<int128>(m.c) * l.a;
  return Point(x, y, w).normalized();
}

// Twice the signed area, exact rational.
inline Rational area2(const Point& p, const Point& q, const Point& r) {
  using detail::widen;
  int512_t det = widen(p.x) * (widen(q.y) * widen(r.w) - widen(r.y) * widen(q.w)) -
                 widen(p.y) * (widen(q.x) * widen(r.w) - widen(r.x) * widen(q.w)) +
                 widen(p.w) * (widen(q.x) * widen(r.y) - widen(r.x) * widen(q.y));
  int512_t den = widen(p.w) * widen(q.w) * widen(r.w);
  return Rational(det.convert_to<BigInt>(), den.convert_to<BigInt>());
}

struct Triangle {
  Point a, b, c;  // CCW
};

struct PointHash {
  std::size_t operator()(const Point& p) const {
    Point n = p.normalized();
    auto mix = [](std::size_t h, int128 v) {
      auto u = static_cast<unsigned __int128>(v);
      h ^= static_cast<std::size_t>(u) + 0x9e3779b97f4a7c15ULL + (h << 6) +
           (h >> 2);
      h ^= static_cast<std::size_t>(u >> 64) + 0x9e3779b97f4a7c15ULL +
           (h << 6) + (h >> 2);
      return h;
    };
    std::size_t h = 0;
    h = mix(h, n.x);
    h = mix(h, n.y);
    h = mix(h, n.w);
    return h;
  }
};

struct PointEq {
  bool operator()(const Point& a, const Point& b) const {
    return points_equal(a, b);
  }
};

inline std::string to_string(int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 m = neg ? -static_cast<unsigned __int128>(v)
                            : static_cast<unsigned __int128>(v);
  std::string s;
  while (m) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(m % 10)));
    m /= 10;
  }
  return neg ? "-" + s : s;
}

inline std::string to_string(const Point& p) {
  std::string s = "(" + to_string(p.x) + "," + to_string(p.y);
  if (p.w != 1) s += ")/" + to_string(p.w);
  else s += ")";
  return s;
}

}  // namespace pointloc
