#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

namespace mollified {

// Relative geometric tolerance; scaled by a local feature length where used.
inline constexpr double kGeomEps = 1e-10;
// Absolute tolerance for bisection root finding on signed distance fields.
inline constexpr double kRootEps = 1e-12;
inline constexpr int kRootMaxIter = 100;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend constexpr Point operator*(Point a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point a, Point b) = default;
};

constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

struct BoundingBox {
  Point lo{};
  Point hi{};

  bool contains(Point p) const { return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y; }
  bool overlaps(const BoundingBox& o) const {
    return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
  }
};

// Inside is {p : normal . p <= offset}.
struct HalfPlane {
  Point normal;
  double offset = 0.0;

  // Normalizes the given normal; throws InvalidArgument on a zero normal.
  static HalfPlane make(Point normal, double offset);
  double signed_excess(Point p) const { return dot(normal, p) - offset; }
};

// Axis-aligned square [center - halfwidth, center + halfwidth]^2.
struct Box {
  Point center;
  double halfwidth = 0.0;

  std::array<HalfPlane, 4> half_planes() const;
  std::array<Point, 4> corners() const;
  BoundingBox bounds() const {
    return {{center.x - halfwidth, center.y - halfwidth}, {center.x + halfwidth, center.y + halfwidth}};
  }
  double area() const { return 4.0 * halfwidth * halfwidth; }
};

struct Triangle {
  Point a, b, c;

  double signed_area() const { return 0.5 * cross(b - a, c - a); }
  Point centroid() const { return (1.0 / 3.0) * (a + b + c); }
};

// Convex polygon with counter-clockwise vertices. A default-constructed
// polygon is the Empty polygon; clipping may legitimately produce it.
class ConvexPolygon {
public:
  ConvexPolygon() = default;

  // Accepts vertices in either orientation. Near-duplicate vertices are
  // merged and slivers with area below kGeomEps * diameter^2 become Empty.
  // Convexity is checked up to tolerance; throws DegenerateGeometry if the
  // input is not convex.
  static ConvexPolygon from_vertices(std::vector<Point> vertices);
  static ConvexPolygon rectangle(Point lo, Point hi);

  bool empty() const { return vertices_.empty(); }
  std::size_t size() const { return vertices_.size(); }
  std::span<const Point> vertices() const { return vertices_; }
  const Point& operator[](std::size_t i) const { return vertices_[i]; }

  double area() const { return area_; }
  Point centroid() const;
  double perimeter() const;
  double diameter() const;
  BoundingBox bounds() const;
  // Closed containment test with a tolerance relative to the diameter.
  bool contains(Point p, double rel_tol = kGeomEps) const;

private:
  std::vector<Point> vertices_;
  double area_ = 0.0;
};

// Returns poly ∩ {n.p <= offset}; Empty when nothing survives.
ConvexPolygon clip_halfplane(const ConvexPolygon& poly, const HalfPlane& h);
ConvexPolygon intersect_box(const ConvexPolygon& poly, const Box& box);
// Hull of {v + c : v vertex of poly, c corner of the origin-centred box}.
ConvexPolygon minkowski_sum(const ConvexPolygon& poly, const Box& box);
// Throws DegenerateGeometry when the points are (nearly) collinear or fewer
// than three distinct points are given.
ConvexPolygon convex_hull(std::span<const Point> points);
// Centroid fan: one triangle (centroid, v_k, v_k+1) per edge.
std::vector<Triangle> triangulate(const ConvexPolygon& poly);

// Implicit domain description. Positive inside, zero on the boundary,
// negative outside. Values are immutable and cheap to copy.
class SignedDistance {
public:
  struct Node;

  // Disc of the given radius; with domain_inside == false the domain is the
  // complement of the disc (a hole).
  static SignedDistance circle(Point center, double radius, bool domain_inside = true);
  static SignedDistance box(Point lo, Point hi);
  // Closed simple polygon (either orientation); exact distance to its edges.
  static SignedDistance polygon(std::vector<Point> boundary);
  // Domain {n.p <= offset}; value is the signed distance to the line.
  static SignedDistance half_plane(Point normal, double offset);
  static SignedDistance intersection(const SignedDistance& a, const SignedDistance& b);
  static SignedDistance unite(const SignedDistance& a, const SignedDistance& b);
  static SignedDistance complement(const SignedDistance& a);

  double operator()(Point p) const;
  // Box corners and polygon vertices that lie on the final boundary.
  std::vector<Point> corners() const;

private:
  explicit SignedDistance(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

inline double signed_distance(const SignedDistance& sdf, Point p) { return sdf(p); }

enum class CellLabel { interior, cut, ghost, exterior };

const char* to_string(CellLabel label);

struct VoronoiDiagram {
  std::vector<Point> seeds;
  std::vector<ConvexPolygon> cells;
  std::vector<CellLabel> labels;
};

// cell_i = bounds ∩ bisector half-planes of (seed_i, seed_j) for all j != i.
// Throws DegenerateGeometry on (near-)duplicate seeds and InvalidArgument
// for an empty seed list or seeds outside bounds.
VoronoiDiagram voronoi(std::span<const Point> seeds, const Box& bounds);
VoronoiDiagram voronoi(std::span<const Point> seeds, const BoundingBox& bounds);

// Labels each cell interior / cut / exterior from the vertex signs of the
// signed distance (min * max < 0 means cut). Ghost labels are assigned later
// by the mesh builder.
VoronoiDiagram classify_cells(VoronoiDiagram vd, const SignedDistance& sdf);
CellLabel classify_cell(const ConvexPolygon& cell, const SignedDistance& sdf);

// Convex hull of the inside vertices, the edge/boundary intersection
// points located by bisection, and the domain corners inside the cell.
// Empty if fewer than three such points remain.
ConvexPolygon clip_cell_to_domain(const ConvexPolygon& cell, const SignedDistance& sdf);

// Root of sdf on the segment [a, b] by bisection; requires a sign change.
Point bisect_boundary(const SignedDistance& sdf, Point a, Point b);

} // namespace mollified
