#include "mollified/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>

#include "mollified/errors.hpp"

namespace mollified {

namespace {

constexpr int kMaxGaussPoints = 64;

LineRule build_gauss(int n) {
  LineRule r;
  r.points.resize(n);
  r.weights.resize(n);
  r.exactness = 2 * n - 1;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (n == 1) {
      x = 0.0;
      dp = 1.0;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.points[i] = -x;
    r.points[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.points[n / 2] = 0.0;
  if (n == 1) r.weights[0] = 2.0;
  return r;
}

void self_test(const LineRule& r, double lo, double hi) {
  double wsum = 0.0;
  for (double w : r.weights) wsum += w;
  if (std::abs(wsum - (hi - lo)) > 1e-14 * (hi - lo)) throw Error("line rule weights do not sum to the interval length");
  for (int k = 0; k <= r.exactness; ++k) {
    double num = 0.0;
    for (std::size_t i = 0; i < r.points.size(); ++i) num += r.weights[i] * std::pow(r.points[i], k);
    const double exact = (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / (k + 1);
    if (std::abs(num - exact) > 1e-13 * std::max(1.0, std::abs(exact)))
      throw Error("line rule fails exactness self-test at degree " + std::to_string(k));
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void self_test(const TriangleRule& r) {
  double wsum = 0.0;
  for (double w : r.weights) wsum += w;
  if (std::abs(wsum - 0.5) > 1e-14) throw Error("triangle rule weights do not sum to 1/2");
  for (int a = 0; a <= r.exactness; ++a)
    for (int b = 0; a + b <= r.exactness; ++b) {
      double num = 0.0;
      for (std::size_t i = 0; i < r.points.size(); ++i)
        num += r.weights[i] * std::pow(r.points[i].x, a) * std::pow(r.points[i].y, b);
      const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
      if (std::abs(num - exact) > 1e-13)
        throw Error("triangle rule fails exactness self-test at x^" + std::to_string(a) + " y^" + std::to_string(b));
    }
}

void add_orbit3(TriangleRule& r, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  r.points.insert(r.points.end(), {Point{a, a}, Point{b, a}, Point{a, b}});
  r.weights.insert(r.weights.end(), {w, w, w});
}

TriangleRule build_triangle(int degree) {
  TriangleRule r;
  switch (degree) {
  case 0:
  case 1:
    r.points = {{1.0 / 3.0, 1.0 / 3.0}};
    r.weights = {0.5};
    r.exactness = 1;
    break;
  case 2:
    add_orbit3(r, 1.0 / 6.0, 1.0 / 6.0);
    r.exactness = 2;
    break;
  case 3:
    r.points = {{1.0 / 3.0, 1.0 / 3.0}};
    r.weights = {-27.0 / 96.0};
    add_orbit3(r, 0.2, 25.0 / 96.0);
    r.exactness = 3;
    break;
  case 4:
    add_orbit3(r, 0.445948490915965, 0.5 * 0.223381589678011);
    add_orbit3(r, 0.091576213509771, 0.5 * 0.109951743655322);
    r.exactness = 4;
    break;
  case 5:
    r.points = {{1.0 / 3.0, 1.0 / 3.0}};
    r.weights = {0.5 * 0.225};
    add_orbit3(r, 0.470142064105115, 0.5 * 0.132394152788506);
    add_orbit3(r, 0.101286507323456, 0.5 * 0.125939180544827);
    r.exactness = 5;
    break;
  default: {
    // Collapsed tensor Gauss: x = u, y = v (1 - u), dA = (1 - u) du dv.
    const LineRule gu = segment_rule(gauss_points_for_degree(degree + 1));
    const LineRule gv = segment_rule(gauss_points_for_degree(degree));
    for (std::size_t i = 0; i < gu.points.size(); ++i)
      for (std::size_t j = 0; j < gv.points.size(); ++j) {
        const double u = gu.points[i];
        r.points.push_back({u, gv.points[j] * (1.0 - u)});
        r.weights.push_back(gu.weights[i] * gv.weights[j] * (1.0 - u));
      }
    r.exactness = degree;
  }
  }
  // Tabulated constants carry ~15 digits; renormalize the weight sum.
  double wsum = 0.0;
  for (double w : r.weights) wsum += w;
  for (double& w : r.weights) w *= 0.5 / wsum;
  self_test(r);
  return r;
}

} // namespace

LineRule gauss_interval(int n) {
  if (n < 1 || n > kMaxGaussPoints) throw InvalidArgument("gauss_interval: unsupported point count " + std::to_string(n));
  static const std::vector<LineRule> table = [] {
    std::vector<LineRule> t(kMaxGaussPoints + 1);
    for (int k = 1; k <= kMaxGaussPoints; ++k) {
      t[k] = build_gauss(k);
      self_test(t[k], -1.0, 1.0);
    }
    return t;
  }();
  return table[n];
}

LineRule segment_rule(int n) {
  LineRule r = gauss_interval(n);
  for (double& x : r.points) x = 0.5 * (x + 1.0);
  for (double& w : r.weights) w *= 0.5;
  return r;
}

TriangleRule triangle_rule(int degree) {
  if (degree < 0 || degree > kMaxTriangleDegree)
    throw InvalidArgument("triangle_rule: unsupported degree " + std::to_string(degree));
  static std::mutex mutex;
  static std::array<std::optional<TriangleRule>, kMaxTriangleDegree + 1> table;
  std::lock_guard lock(mutex);
  if (!table[degree]) table[degree] = build_triangle(degree);
  return *table[degree];
}

std::vector<QuadraturePoint> map_rule(const Triangle& tri, const TriangleRule& rule) {
  std::vector<QuadraturePoint> out;
  out.reserve(rule.points.size());
  const Point e1 = tri.b - tri.a;
  const Point e2 = tri.c - tri.a;
  const double jac = std::abs(cross(e1, e2));
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    const Point r = rule.points[i];
    out.push_back({tri.a + r.x * e1 + r.y * e2, rule.weights[i] * jac});
  }
  return out;
}

double integrate_over_polygon(const std::function<double(Point)>& f, const ConvexPolygon& poly, int degree) {
  const TriangleRule rule = triangle_rule(degree);
  double sum = 0.0;
  for (const Triangle& t : triangulate(poly))
    for (const QuadraturePoint& q : map_rule(t, rule)) sum += q.weight * f(q.x);
  return sum;
}

CurvedTriangle CurvedTriangle::straight(const Triangle& t) {
  return {{t.a, t.b, t.c, 0.5 * (t.a + t.b), 0.5 * (t.b + t.c), 0.5 * (t.c + t.a)}};
}

namespace {

struct P2Eval {
  std::array<double, 6> n;
  std::array<double, 6> dxi;
  std::array<double, 6> deta;
};

P2Eval p2_shape(Point ref) {
  const double l1 = 1.0 - ref.x - ref.y, l2 = ref.x, l3 = ref.y;
  P2Eval e;
  e.n = {l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), l3 * (2 * l3 - 1), 4 * l1 * l2, 4 * l2 * l3, 4 * l3 * l1};
  e.dxi = {-(4 * l1 - 1), 4 * l2 - 1, 0.0, 4 * (l1 - l2), 4 * l3, -4 * l3};
  e.deta = {-(4 * l1 - 1), 0.0, 4 * l3 - 1, -4 * l2, 4 * l2, 4 * (l1 - l3)};
  return e;
}

} // namespace

Point CurvedTriangle::map(Point ref) const {
  const P2Eval e = p2_shape(ref);
  Point p{};
  for (int k = 0; k < 6; ++k) p = p + e.n[k] * nodes[k];
  return p;
}

double CurvedTriangle::jacobian(Point ref) const {
  const P2Eval e = p2_shape(ref);
  Point dxi{}, deta{};
  for (int k = 0; k < 6; ++k) {
    dxi = dxi + e.dxi[k] * nodes[k];
    deta = deta + e.deta[k] * nodes[k];
  }
  return cross(dxi, deta);
}

double CurvedTriangle::area(int degree) const {
  const TriangleRule rule = triangle_rule(degree);
  double a = 0.0;
  for (std::size_t i = 0; i < rule.points.size(); ++i) a += rule.weights[i] * jacobian(rule.points[i]);
  return a;
}

std::vector<QuadraturePoint> map_rule(const CurvedTriangle& tri, const TriangleRule& rule) {
  std::vector<QuadraturePoint> out;
  out.reserve(rule.points.size());
  for (std::size_t i = 0; i < rule.points.size(); ++i)
    out.push_back({tri.map(rule.points[i]), rule.weights[i] * std::abs(tri.jacobian(rule.points[i]))});
  return out;
}

namespace {

// Signed offset t along `dir` from `mid` to the nearest zero of sdf within
// |t| <= reach, or NaN if none is bracketed.
double find_level_set_offset(const SignedDistance& sdf, Point mid, Point dir, double reach) {
  const double f0 = sdf(mid);
  if (std::abs(f0) <= kRootEps) return 0.0;
  constexpr int kSamples = 32;
  for (int k = 1; k <= kSamples; ++k) {
    for (double sgn : {1.0, -1.0}) {
      const double t1 = sgn * reach * k / kSamples;
      const double f1 = sdf(mid + t1 * dir);
      if ((f1 > 0.0) != (f0 > 0.0) || f1 == 0.0) {
        const Point root = bisect_boundary(sdf, mid + (sgn * reach * (k - 1) / kSamples) * dir, mid + t1 * dir);
        return dot(root - mid, dir);
      }
    }
  }
  return std::nan("");
}

} // namespace

MidnodeProjection project_midnodes(const Triangle& tri, const SignedDistance& sdf, std::array<bool, 3> boundary_edges) {
  MidnodeProjection out{CurvedTriangle::straight(tri), false};
  const std::array<Point, 3> corners{tri.a, tri.b, tri.c};
  for (int e = 0; e < 3; ++e) {
    if (!boundary_edges[e]) continue;
    const Point p = corners[e];
    const Point q = corners[(e + 1) % 3];
    const double len = distance(p, q);
    if (!(len > 0.0)) {
      out.fallback = true;
      continue;
    }
    const Point dir{(q.y - p.y) / len, -(q.x - p.x) / len};
    const double t = find_level_set_offset(sdf, 0.5 * (p + q), dir, 0.5 * len);
    if (std::isnan(t) || std::abs(t) > 0.5 * len) {
      out.fallback = true;
      continue;
    }
    out.triangle.nodes[3 + e] = 0.5 * (p + q) + t * dir;
  }
  // Reject maps that fold; those edges go back to straight.
  const TriangleRule check = triangle_rule(6);
  auto positive = [&](const CurvedTriangle& ct) {
    for (Point r : check.points)
      if (!(ct.jacobian(r) > 0.0)) return false;
    for (Point r : {Point{0, 0}, Point{1, 0}, Point{0, 1}, Point{0.5, 0}, Point{0.5, 0.5}, Point{0, 0.5}})
      if (!(ct.jacobian(r) > 0.0)) return false;
    return true;
  };
  if (!positive(out.triangle)) {
    out.triangle = CurvedTriangle::straight(tri);
    out.fallback = true;
  }
  return out;
}

Point BoundarySegment::at(double s) const {
  return (1.0 - s) * (1.0 - 2.0 * s) * a + 4.0 * s * (1.0 - s) * mid + s * (2.0 * s - 1.0) * b;
}

Point BoundarySegment::tangent(double s) const { return (4.0 * s - 3.0) * a + (4.0 - 8.0 * s) * mid + (4.0 * s - 1.0) * b; }

Point BoundarySegment::normal(double s) const {
  const Point t = tangent(s);
  const double len = norm(t);
  return {t.y / len, -t.x / len};
}

std::vector<BoundaryPoint> map_rule(const BoundarySegment& seg, const LineRule& unit_rule) {
  std::vector<BoundaryPoint> out;
  out.reserve(unit_rule.points.size());
  for (std::size_t i = 0; i < unit_rule.points.size(); ++i) {
    const double s = unit_rule.points[i];
    out.push_back({seg.at(s), seg.normal(s), unit_rule.weights[i] * norm(seg.tangent(s))});
  }
  return out;
}

} // namespace mollified
