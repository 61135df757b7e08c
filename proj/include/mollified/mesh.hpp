#pragma once

#include <cstdint>
#include <vector>

#include "mollified/basis.hpp"
#include "mollified/geometry.hpp"
#include "mollified/mollifier.hpp"
#include "mollified/quadrature.hpp"

namespace mollified {

// A convex partition of a region containing the domain: one polygon and
// one basis centre per cell.
struct Partition {
  std::vector<Point> centers;
  std::vector<ConvexPolygon> cells;
};

Partition partition_from_voronoi(const VoronoiDiagram& vd);

// Splits every k-gon into k quadrilaterals (centroid, edge midpoint,
// vertex, edge midpoint). Centres become the quad centroids; the result is
// nested in the input.
Partition refine_partition(const Partition& p);

struct SeedLattice {
  int n = 4;                 // n x n seeds inside the unit square
  int ghost_layers = 1;      // extra rings of seeds outside
  double perturbation = 0.0; // uniform amplitude per coordinate
  std::uint64_t rng_seed = 1;
};

// Seeds at ((i + 0.5)/n, (j + 0.5)/n) on [0,1]^2 plus ghost rings. Seeds
// not adjacent to the square's boundary get a uniform perturbation; ghost
// seeds stay on the lattice. Returns the seeds and padded Voronoi bounds.
struct SeedSet {
  std::vector<Point> seeds;
  BoundingBox bounds;
};
SeedSet lattice_seeds(const SeedLattice& spec);
// Voronoi partition of lattice_seeds(spec).
Partition lattice_partition(const SeedLattice& spec);

struct MeshCell {
  Point center;
  ConvexPolygon cell;   // full partition polygon
  ConvexPolygon domain; // clipped integration polygon (Empty unless interior/cut)
  CellLabel label = CellLabel::interior;
  std::vector<CurvedTriangle> triangles;
  std::vector<BoundarySegment> boundary;
  ConvexPolygon support;          // cell ⊕ mollifier box
  double support_fraction = 1.0;  // |support ∩ Ω| / |support|
  int block = -1;                 // dof block, -1 for pruned cells
};

struct MeshOptions {
  int degree = 1;
  // Mollifier support; values <= 0 select 2 h.
  double mollifier_support = 0.0;
  MollifierKind kind = MollifierKind::quartic;
  int bspline_degree = 1;
  // Move the mid-edge nodes of boundary triangle edges onto φ = 0.
  bool curved = false;
};

class Mesh {
public:
  Mesh(SignedDistance domain, std::vector<MeshCell> cells, MollifierTensor m, int degree, double h);

  const SignedDistance& domain() const { return domain_; }
  const std::vector<MeshCell>& cells() const { return cells_; }
  const MollifierTensor& mollifier() const { return m_; }
  int degree() const { return degree_; }
  double h() const { return h_; }
  int num_blocks() const { return num_blocks_; }
  // Interior plus cut cells.
  int num_domain_cells() const;
  int count(CellLabel label) const;
  int projection_fallbacks = 0;

  // Cells whose mollified basis may be non-zero at p (superset).
  void candidates(Point p, std::vector<int>& out) const;
  // Cells whose partition polygon may overlap the box (superset).
  void cells_near(const BoundingBox& b, std::vector<int>& out) const;

private:
  SignedDistance domain_;
  std::vector<MeshCell> cells_;
  MollifierTensor m_;
  int degree_;
  double h_;
  int num_blocks_ = 0;

  // Uniform bucket grid over cell bounds expanded by the mollifier box.
  BoundingBox grid_box_;
  double bucket_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> support_buckets_, cell_buckets_;
  void build_index();
  int bucket_of(double v, double lo, int n) const;
};

// Classifies and clips the partition against the domain, builds the
// integration triangles and boundary traces, prunes cells whose support
// misses the domain, and checks that every mollifier box centred in the
// domain is covered (throws CoverageError otherwise).
Mesh build_mesh(const SignedDistance& domain, const Partition& partition, const MeshOptions& opts);

// Area of the intersection of two convex polygons.
double overlap_area(const ConvexPolygon& a, const ConvexPolygon& b);

} // namespace mollified
