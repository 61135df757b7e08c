#include <doctest.h>

#include <cmath>
#include <random>

#include "mollified/errors.hpp"
#include "mollified/mesh.hpp"

using namespace mollified;

namespace {

SignedDistance plate_domain() {
  return SignedDistance::intersection(SignedDistance::box({0, 0}, {1, 1}),
                                      SignedDistance::circle({0, 0}, 0.25, false));
}

double boundary_length(const Mesh& mesh) {
  double len = 0.0;
  const LineRule r = segment_rule(8);
  for (const MeshCell& c : mesh.cells())
    for (const BoundarySegment& s : c.boundary)
      for (const BoundaryPoint& bp : map_rule(s, r)) len += bp.weight;
  return len;
}

} // namespace

TEST_CASE("lattice seeds") {
  const SeedSet s = lattice_seeds({4, 1, 0.0, 1});
  CHECK(s.seeds.size() == 36);
  CHECK(s.bounds.lo.x == doctest::Approx(-0.25));
  CHECK(s.bounds.hi.y == doctest::Approx(1.25));
  const SeedSet p = lattice_seeds({6, 1, 0.02, 3});
  const SeedSet q = lattice_seeds({6, 1, 0.02, 3});
  int moved = 0;
  for (std::size_t i = 0; i < p.seeds.size(); ++i) {
    CHECK(p.seeds[i] == q.seeds[i]);
    const Point base{(static_cast<int>(i / 8) - 0.5) / 6.0, (static_cast<int>(i % 8) - 0.5) / 6.0};
    const double d = std::max(std::abs(p.seeds[i].x - base.x), std::abs(p.seeds[i].y - base.y));
    CHECK(d <= 0.02 + 1e-15);
    if (d > 1e-14) ++moved;
  }
  CHECK(moved == 16);
  CHECK_THROWS_AS(lattice_seeds({4, 1, 0.2, 1}), InvalidArgument);
}

TEST_CASE("unit square mesh with ghost ring") {
  const Mesh mesh = build_mesh(SignedDistance::box({0, 0}, {1, 1}), lattice_partition({4, 1, 0.0, 1}), {});
  CHECK(mesh.count(CellLabel::interior) == 16);
  CHECK(mesh.count(CellLabel::ghost) == 20);
  CHECK(mesh.count(CellLabel::cut) == 0);
  CHECK(mesh.num_blocks() == 36);
  CHECK(mesh.h() == doctest::Approx(0.25));
  CHECK(mesh.mollifier().support() == doctest::Approx(0.5));
  CHECK(boundary_length(mesh) == doctest::Approx(4.0).epsilon(1e-12));
  for (const MeshCell& c : mesh.cells()) {
    if (c.label == CellLabel::ghost) {
      CHECK(c.domain.empty());
      CHECK(c.triangles.empty());
      CHECK(c.support_fraction < 1.0);
    } else {
      CHECK(c.domain.area() == doctest::Approx(1.0 / 16));
    }
  }
  // Corner box lies in the union of the cells.
  const Box corner = mesh.mollifier().support_box({0, 0});
  double covered = 0.0;
  for (const MeshCell& c : mesh.cells()) covered += intersect_box(c.cell, corner).area();
  CHECK(covered == doctest::Approx(corner.area()).epsilon(1e-12));
}

TEST_CASE("missing ghost layer is reported") {
  CHECK_THROWS_AS(build_mesh(SignedDistance::box({0, 0}, {1, 1}), lattice_partition({4, 0, 0.0, 1}), {}),
                  CoverageError);
}

TEST_CASE("larger mollifier prunes nothing it needs") {
  MeshOptions o;
  o.mollifier_support = 0.3;
  const Mesh mesh = build_mesh(SignedDistance::box({0, 0}, {1, 1}), lattice_partition({4, 1, 0.0, 1}), o);
  CHECK(mesh.num_blocks() == 36);
  o.mollifier_support = 0.1;
  const Mesh small = build_mesh(SignedDistance::box({0, 0}, {1, 1}), lattice_partition({4, 1, 0.0, 1}), o);
  CHECK(small.num_blocks() == 36);
}

TEST_CASE("plate with hole classification") {
  const SignedDistance phi = plate_domain();
  const Mesh mesh = build_mesh(phi, lattice_partition({6, 1, 0.0, 1}), {});
  int cut_checked = 0;
  for (const MeshCell& c : mesh.cells()) {
    double lo = 1e300, hi = -1e300;
    for (Point v : c.cell.vertices()) {
      lo = std::min(lo, phi(v));
      hi = std::max(hi, phi(v));
    }
    const double tol = 1e-12;
    if (lo < -tol && hi > tol) {
      CHECK(c.label == CellLabel::cut);
      ++cut_checked;
    }
    if (lo > tol) CHECK(c.label == CellLabel::interior);
    if (c.label == CellLabel::cut)
      for (Point v : c.domain.vertices()) CHECK(phi(v) >= -1e-10);
  }
  CHECK(cut_checked > 0);
  // Every cell meeting the circle is cut.
  for (const MeshCell& c : mesh.cells()) {
    bool meets = false;
    for (int k = 0; k < 64; ++k) {
      const double t = 0.5 * M_PI * (k + 0.5) / 64;
      meets = meets || c.cell.contains({0.25 * std::cos(t), 0.25 * std::sin(t)}, 0.0);
    }
    if (meets) CHECK(c.label == CellLabel::cut);
  }
  // Straight traces approximate the boundary length from below.
  const double exact = 2.0 * 0.75 + 2.0 + 0.5 * M_PI * 0.25;
  const double straight = boundary_length(mesh);
  CHECK(straight < exact);
  CHECK(straight > exact - 1e-2);

  MeshOptions o;
  o.curved = true;
  const Mesh curved = build_mesh(phi, lattice_partition({6, 1, 0.0, 1}), o);
  CHECK(curved.projection_fallbacks == 0);
  CHECK(std::abs(boundary_length(curved) - exact) < 0.1 * std::abs(straight - exact));

  double area = 0.0;
  for (const MeshCell& c : curved.cells())
    for (const CurvedTriangle& t : c.triangles) area += t.area();
  CHECK(area == doctest::Approx(1.0 - M_PI * 0.0625 / 4).epsilon(1e-4));
}

TEST_CASE("nested refinement") {
  const Partition p = lattice_partition({3, 1, 0.0, 1});
  const Partition r = refine_partition(p);
  CHECK(r.cells.size() == 4 * p.cells.size());
  double a0 = 0, a1 = 0;
  for (const auto& c : p.cells) a0 += c.area();
  for (const auto& c : r.cells) a1 += c.area();
  CHECK(a1 == doctest::Approx(a0).epsilon(1e-13));
  for (std::size_t i = 0; i < r.cells.size(); ++i) CHECK(r.cells[i].contains(r.centers[i]));

  const Mesh fine = build_mesh(plate_domain(), refine_partition(refine_partition(lattice_partition({6, 1, 0.0, 1}))), {});
  CHECK(fine.h() < 0.06);
  CHECK(fine.num_domain_cells() > 36 * 10);
}

TEST_CASE("overlap area and candidate queries") {
  const ConvexPolygon a = ConvexPolygon::rectangle({0, 0}, {2, 1});
  const ConvexPolygon b = ConvexPolygon::from_vertices({{1, -1}, {3, 0.5}, {1, 2}});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ux(0, 2), uy(0, 1);
  int hits = 0;
  const int n = 400000;
  for (int k = 0; k < n; ++k)
    if (b.contains({ux(rng), uy(rng)}, 0.0)) ++hits;
  CHECK(overlap_area(a, b) == doctest::Approx(2.0 * hits / n).epsilon(1e-2));
  CHECK(overlap_area(a, ConvexPolygon::rectangle({5, 5}, {6, 6})) == 0.0);

  SeedLattice sl{5, 1, 0.03, 9};
  const Mesh mesh = build_mesh(SignedDistance::box({0, 0}, {1, 1}), lattice_partition(sl), {});
  const double w = mesh.mollifier().halfwidth();
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<int> cand;
  for (int k = 0; k < 500; ++k) {
    const Point p{u(rng), u(rng)};
    mesh.candidates(p, cand);
    for (std::size_t i = 0; i < mesh.cells().size(); ++i) {
      const MeshCell& c = mesh.cells()[i];
      if (c.block < 0) continue;
      const bool touches = intersect_box(c.cell, Box{p, w}).area() > 0.0;
      if (touches) CHECK(std::find(cand.begin(), cand.end(), static_cast<int>(i)) != cand.end());
    }
  }
}
