#include "mollified/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "mollified/errors.hpp"

namespace mollified {

namespace {

double max_pairwise_distance(std::span<const Point> pts) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const Point d = pts[i] - pts[j];
      d2 = std::max(d2, dot(d, d));
    }
  return std::sqrt(d2);
}

double signed_area(std::span<const Point> pts) {
  double a = 0.0;
  for (std::size_t i = 0, n = pts.size(); i < n; ++i) a += cross(pts[i], pts[(i + 1) % n]);
  return 0.5 * a;
}

} // namespace

HalfPlane HalfPlane::make(Point normal, double offset) {
  const double len = norm(normal);
  if (!(len > 0.0) || !std::isfinite(len)) throw InvalidArgument("half-plane normal must be non-zero");
  return {(1.0 / len) * normal, offset / len};
}

std::array<HalfPlane, 4> Box::half_planes() const {
  const Point c = center;
  const double w = halfwidth;
  return {HalfPlane{{1.0, 0.0}, c.x + w}, HalfPlane{{-1.0, 0.0}, -(c.x - w)}, HalfPlane{{0.0, 1.0}, c.y + w},
          HalfPlane{{0.0, -1.0}, -(c.y - w)}};
}

std::array<Point, 4> Box::corners() const {
  const Point c = center;
  const double w = halfwidth;
  return {Point{c.x - w, c.y - w}, Point{c.x + w, c.y - w}, Point{c.x + w, c.y + w}, Point{c.x - w, c.y + w}};
}

ConvexPolygon ConvexPolygon::from_vertices(std::vector<Point> vertices) {
  ConvexPolygon poly;
  if (vertices.size() < 3) return poly;
  for (const Point& p : vertices)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidArgument("polygon vertex is not finite");

  const double diam = max_pairwise_distance(vertices);
  if (!(diam > 0.0)) return poly;
  const double merge_tol = kGeomEps * diam;

  std::vector<Point> v;
  v.reserve(vertices.size());
  for (const Point& p : vertices)
    if (v.empty() || distance(v.back(), p) > merge_tol) v.push_back(p);
  while (v.size() > 1 && distance(v.front(), v.back()) <= merge_tol) v.pop_back();
  if (v.size() < 3) return poly;

  double area = signed_area(v);
  if (area < 0.0) {
    std::reverse(v.begin(), v.end());
    area = -area;
  }
  if (area < kGeomEps * diam * diam) return poly;

  const double turn_tol = kGeomEps * diam * diam;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const Point e0 = v[(i + 1) % n] - v[i];
    const Point e1 = v[(i + 2) % n] - v[(i + 1) % n];
    if (cross(e0, e1) < -turn_tol) throw DegenerateGeometry("polygon is not convex");
  }
  poly.vertices_ = std::move(v);
  poly.area_ = area;
  return poly;
}

ConvexPolygon ConvexPolygon::rectangle(Point lo, Point hi) {
  return from_vertices({lo, {hi.x, lo.y}, hi, {lo.x, hi.y}});
}

Point ConvexPolygon::centroid() const {
  if (empty()) return {};
  // Shift to the first vertex for round-off.
  const Point o = vertices_[0];
  double cx = 0.0, cy = 0.0, a2 = 0.0;
  for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
    const Point p = vertices_[i] - o;
    const Point q = vertices_[(i + 1) % n] - o;
    const double c = cross(p, q);
    a2 += c;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  return o + Point{cx / (3.0 * a2), cy / (3.0 * a2)};
}

double ConvexPolygon::perimeter() const {
  double p = 0.0;
  for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) p += distance(vertices_[i], vertices_[(i + 1) % n]);
  return p;
}

double ConvexPolygon::diameter() const { return max_pairwise_distance(vertices_); }

BoundingBox ConvexPolygon::bounds() const {
  BoundingBox b{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
                {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (const Point& p : vertices_) {
    b.lo.x = std::min(b.lo.x, p.x);
    b.lo.y = std::min(b.lo.y, p.y);
    b.hi.x = std::max(b.hi.x, p.x);
    b.hi.y = std::max(b.hi.y, p.y);
  }
  return b;
}

bool ConvexPolygon::contains(Point p, double rel_tol) const {
  if (empty()) return false;
  const double d = diameter();
  const double tol = rel_tol * d * d;
  for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
    const Point a = vertices_[i];
    const Point b = vertices_[(i + 1) % n];
    if (cross(b - a, p - a) < -tol) return false;
  }
  return true;
}

ConvexPolygon clip_halfplane(const ConvexPolygon& poly, const HalfPlane& h) {
  if (poly.empty()) return {};
  const auto v = poly.vertices();
  const std::size_t n = v.size();
  const double tol = kGeomEps * poly.diameter();

  std::vector<double> d(n);
  bool any_out = false, any_in = false;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = h.signed_excess(v[i]);
    if (std::abs(d[i]) <= tol) d[i] = 0.0;
    any_out |= d[i] > 0.0;
    any_in |= d[i] < 0.0;
  }
  if (!any_out) return poly;
  if (!any_in) return {};

  std::vector<Point> out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    if (d[i] <= 0.0) out.push_back(v[i]);
    if ((d[i] < 0.0 && d[j] > 0.0) || (d[i] > 0.0 && d[j] < 0.0)) {
      const double t = d[i] / (d[i] - d[j]);
      out.push_back(v[i] + t * (v[j] - v[i]));
    }
  }
  return ConvexPolygon::from_vertices(std::move(out));
}

ConvexPolygon intersect_box(const ConvexPolygon& poly, const Box& box) {
  if (poly.empty()) return {};
  const BoundingBox pb = poly.bounds();
  const BoundingBox bb = box.bounds();
  if (!pb.overlaps(bb)) return {};
  if (bb.contains(pb.lo) && bb.contains(pb.hi)) return poly;
  ConvexPolygon r = poly;
  for (const HalfPlane& h : box.half_planes()) {
    r = clip_halfplane(r, h);
    if (r.empty()) break;
  }
  return r;
}

ConvexPolygon minkowski_sum(const ConvexPolygon& poly, const Box& box) {
  if (poly.empty()) return {};
  std::vector<Point> pts;
  pts.reserve(4 * poly.size());
  const Box origin_box{{0.0, 0.0}, box.halfwidth};
  for (const Point& v : poly.vertices())
    for (const Point& c : origin_box.corners()) pts.push_back(v + c);
  return convex_hull(pts);
}

ConvexPolygon convex_hull(std::span<const Point> points) {
  std::vector<Point> p(points.begin(), points.end());
  if (p.size() < 3) throw DegenerateGeometry("convex hull needs at least three points");
  std::sort(p.begin(), p.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  double scale = 0.0;
  for (const Point& q : p) scale = std::max(scale, distance(q, p.front()));
  const double tol = kGeomEps * scale * scale;
  // near-duplicates would let the collinearity test drop a true vertex
  std::vector<Point> u;
  for (const Point& q : p)
    if (std::none_of(u.begin(), u.end(), [&](Point r) { return distance(q, r) <= 1e-9 * scale; })) u.push_back(q);
  p = std::move(u);
  if (p.size() < 3) throw DegenerateGeometry("convex hull needs at least three distinct points");

  // Andrew's monotone chain; collinear points are dropped.
  std::vector<Point> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= tol) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= tol) --k;
    h[k++] = p[i];
  }
  h.resize(k > 0 ? k - 1 : 0);
  if (h.size() < 3) throw DegenerateGeometry("convex hull input is collinear");
  ConvexPolygon poly = ConvexPolygon::from_vertices(std::move(h));
  if (poly.empty()) throw DegenerateGeometry("convex hull input is collinear");
  return poly;
}

std::vector<Triangle> triangulate(const ConvexPolygon& poly) {
  std::vector<Triangle> tris;
  if (poly.empty()) return tris;
  const Point c = poly.centroid();
  const auto v = poly.vertices();
  tris.reserve(v.size());
  for (std::size_t i = 0, n = v.size(); i < n; ++i) tris.push_back({c, v[i], v[(i + 1) % n]});
  return tris;
}

const char* to_string(CellLabel label) {
  switch (label) {
  case CellLabel::interior: return "interior";
  case CellLabel::cut: return "cut";
  case CellLabel::ghost: return "ghost";
  case CellLabel::exterior: return "exterior";
  }
  return "unknown";
}

CellLabel classify_cell(const ConvexPolygon& cell, const SignedDistance& sdf) {
  if (cell.empty()) return CellLabel::exterior;
  const double tol = kGeomEps * cell.diameter();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Point& v : cell.vertices()) {
    double phi = sdf(v);
    if (std::abs(phi) <= tol) phi = 0.0;
    lo = std::min(lo, phi);
    hi = std::max(hi, phi);
  }
  if (lo * hi < 0.0) return CellLabel::cut;
  // All vertices on the boundary cannot happen for a cell with area; treat
  // touching-only cells by the sign of the non-zero extreme.
  return hi > 0.0 ? CellLabel::interior : CellLabel::exterior;
}

VoronoiDiagram classify_cells(VoronoiDiagram vd, const SignedDistance& sdf) {
  vd.labels.resize(vd.cells.size());
  for (std::size_t i = 0; i < vd.cells.size(); ++i) vd.labels[i] = classify_cell(vd.cells[i], sdf);
  return vd;
}

Point bisect_boundary(const SignedDistance& sdf, Point a, Point b) {
  double fa = sdf(a);
  const double fb = sdf(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw InvalidArgument("bisect_boundary: no sign change on segment");
  for (int it = 0; it < kRootMaxIter && distance(a, b) > kRootEps; ++it) {
    const Point m = 0.5 * (a + b);
    const double fm = sdf(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

ConvexPolygon clip_cell_to_domain(const ConvexPolygon& cell, const SignedDistance& sdf) {
  if (cell.empty()) return {};
  const auto v = cell.vertices();
  const std::size_t n = v.size();
  const double tol = kGeomEps * cell.diameter();
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    phi[i] = sdf(v[i]);
    if (std::abs(phi[i]) <= tol) phi[i] = 0.0;
  }
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    if (phi[i] >= 0.0) pts.push_back(v[i]);
    // Closed-set bisection so that an edge running along φ = 0 from an
    // outside vertex still finds where the domain starts.
    if ((phi[i] >= 0.0) != (phi[j] >= 0.0)) {
      Point in = phi[i] >= 0.0 ? v[i] : v[j], out = phi[i] >= 0.0 ? v[j] : v[i];
      for (int it = 0; it < kRootMaxIter && distance(in, out) > kRootEps; ++it) {
        const Point m = 0.5 * (in + out);
        (sdf(m) >= 0.0 ? in : out) = m;
      }
      pts.push_back(in);
    }
  }
  // Domain corners inside the cell are not found on its edges.
  for (Point c : sdf.corners())
    if (cell.contains(c)) pts.push_back(c);
  if (pts.size() < 3) return {};
  try {
    return convex_hull(pts);
  } catch (const DegenerateGeometry&) {
    return {};
  }
}

} // namespace mollified
