#pragma once

#include <array>
#include <functional>
#include <vector>

#include "mollified/geometry.hpp"

namespace mollified {

// Rule on an interval; gauss_interval uses [-1, 1], segment_rule [0, 1].
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int exactness = 0;
};

// Rule on the reference triangle (0,0), (1,0), (0,1); weights sum to 1/2.
struct TriangleRule {
  std::vector<Point> points;
  std::vector<double> weights;
  int exactness = 0;
};

// n-point Gauss–Legendre on [-1, 1], exact to degree 2n - 1.
LineRule gauss_interval(int n);
// n-point Gauss–Legendre mapped to [0, 1].
LineRule segment_rule(int n);
// Smallest available rule exact to at least `degree`. Symmetric tables up to
// degree 5, collapsed tensor Gauss above. Throws InvalidArgument for
// negative or unsupported degrees.
TriangleRule triangle_rule(int degree);
// Gauss points needed on an interval for exactness of the given degree.
inline int gauss_points_for_degree(int degree) { return degree < 1 ? 1 : (degree + 2) / 2; }

// Largest degree supported by triangle_rule.
inline constexpr int kMaxTriangleDegree = 40;

double integrate_over_polygon(const std::function<double(Point)>& f, const ConvexPolygon& poly, int degree);

// Quadratic 6-node triangle: corners 0, 1, 2 and mid-edge nodes 3 (0-1),
// 4 (1-2), 5 (2-0).
struct CurvedTriangle {
  std::array<Point, 6> nodes;

  static CurvedTriangle straight(const Triangle& t);
  Point map(Point ref) const;
  // Jacobian determinant of the reference-to-physical map.
  double jacobian(Point ref) const;
  double area(int degree = 6) const;
};

struct QuadraturePoint {
  Point x;
  double weight = 0.0;
};

std::vector<QuadraturePoint> map_rule(const CurvedTriangle& tri, const TriangleRule& rule);
std::vector<QuadraturePoint> map_rule(const Triangle& tri, const TriangleRule& rule);

struct MidnodeProjection {
  CurvedTriangle triangle;
  // Set when a projection failed and the edge was left straight.
  bool fallback = false;
};

// Moves the mid-edge nodes of the flagged edges (0: 0-1, 1: 1-2, 2: 2-0)
// onto the zero level set along the edge normal. Falls back to a straight
// edge if the projection distance exceeds half the edge length, no root is
// bracketed, or the Jacobian turns non-positive.
MidnodeProjection project_midnodes(const Triangle& tri, const SignedDistance& sdf,
                                   std::array<bool, 3> boundary_edges);

// Quadratic boundary segment through a, mid, b (mid at parameter 1/2).
struct BoundarySegment {
  Point a, mid, b;

  Point at(double s) const;
  Point tangent(double s) const;
  // Outward normal for a segment traversed counter-clockwise around the
  // domain piece it bounds.
  Point normal(double s) const;
};

// Quadrature points on the segment with weights including |x'(s)|.
struct BoundaryPoint {
  Point x;
  Point normal;
  double weight = 0.0;
};

std::vector<BoundaryPoint> map_rule(const BoundarySegment& seg, const LineRule& unit_rule);

} // namespace mollified
