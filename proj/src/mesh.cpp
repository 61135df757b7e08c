#include "mollified/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mollified/errors.hpp"

namespace mollified {

Partition partition_from_voronoi(const VoronoiDiagram& vd) { return {vd.seeds, vd.cells}; }

Partition refine_partition(const Partition& p) {
  Partition out;
  for (const ConvexPolygon& cell : p.cells) {
    const Point c = cell.centroid();
    const std::size_t n = cell.size();
    for (std::size_t k = 0; k < n; ++k) {
      const Point v = cell[k];
      const Point prev = 0.5 * (cell[(k + n - 1) % n] + v);
      const Point next = 0.5 * (v + cell[(k + 1) % n]);
      ConvexPolygon quad = ConvexPolygon::from_vertices({c, prev, v, next});
      if (quad.empty()) continue;
      out.centers.push_back(quad.centroid());
      out.cells.push_back(std::move(quad));
    }
  }
  return out;
}

SeedSet lattice_seeds(const SeedLattice& spec) {
  if (spec.n < 1) throw InvalidArgument("seed lattice needs n >= 1");
  if (spec.ghost_layers < 0) throw InvalidArgument("ghost layers must be non-negative");
  const int n = spec.n, g = spec.ghost_layers;
  const double s = 1.0 / n;
  if (!(spec.perturbation >= 0.0) || spec.perturbation >= 0.5 * s)
    throw InvalidArgument("seed perturbation must lie in [0, spacing/2)");
  std::mt19937_64 rng(spec.rng_seed);
  std::uniform_real_distribution<double> u(-spec.perturbation, spec.perturbation);
  SeedSet out;
  for (int i = -g; i < n + g; ++i)
    for (int j = -g; j < n + g; ++j) {
      Point p{(i + 0.5) * s, (j + 0.5) * s};
      const bool inner = i >= 1 && i <= n - 2 && j >= 1 && j <= n - 2;
      if (inner && spec.perturbation > 0.0) {
        p.x += u(rng);
        p.y += u(rng);
      }
      out.seeds.push_back(p);
    }
  out.bounds = {{-g * s, -g * s}, {1.0 + g * s, 1.0 + g * s}};
  return out;
}

Partition lattice_partition(const SeedLattice& spec) {
  const SeedSet s = lattice_seeds(spec);
  return partition_from_voronoi(voronoi(s.seeds, s.bounds));
}

double overlap_area(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (a.empty() || b.empty()) return 0.0;
  const BoundingBox ba = a.bounds(), bb = b.bounds();
  if (!ba.overlaps(bb)) return 0.0;
  ConvexPolygon r = a;
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n && !r.empty(); ++k) {
    const Point p = b[k], q = b[(k + 1) % n];
    const Point nrm{q.y - p.y, p.x - q.x};
    r = clip_halfplane(r, HalfPlane::make(nrm, dot(nrm, p)));
  }
  return r.area();
}

Mesh::Mesh(SignedDistance domain, std::vector<MeshCell> cells, MollifierTensor m, int degree, double h)
    : domain_(std::move(domain)), cells_(std::move(cells)), m_(std::move(m)), degree_(degree), h_(h) {
  for (const MeshCell& c : cells_) num_blocks_ = std::max(num_blocks_, c.block + 1);
  build_index();
}

int Mesh::num_domain_cells() const { return count(CellLabel::interior) + count(CellLabel::cut); }

int Mesh::count(CellLabel label) const {
  return static_cast<int>(std::count_if(cells_.begin(), cells_.end(), [&](const MeshCell& c) { return c.label == label; }));
}

int Mesh::bucket_of(double v, double lo, int n) const {
  const int b = static_cast<int>(std::floor((v - lo) / bucket_));
  return std::clamp(b, 0, n - 1);
}

void Mesh::build_index() {
  const double w = m_.halfwidth();
  bool first = true;
  for (const MeshCell& c : cells_) {
    const BoundingBox b = c.cell.bounds();
    if (first) {
      grid_box_ = b;
      first = false;
    }
    grid_box_.lo = {std::min(grid_box_.lo.x, b.lo.x - w), std::min(grid_box_.lo.y, b.lo.y - w)};
    grid_box_.hi = {std::max(grid_box_.hi.x, b.hi.x + w), std::max(grid_box_.hi.y, b.hi.y + w)};
  }
  bucket_ = std::max(h_, 1e-12);
  nx_ = std::max(1, static_cast<int>(std::ceil((grid_box_.hi.x - grid_box_.lo.x) / bucket_)));
  ny_ = std::max(1, static_cast<int>(std::ceil((grid_box_.hi.y - grid_box_.lo.y) / bucket_)));
  support_buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  cell_buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const BoundingBox b = cells_[i].cell.bounds();
    const auto insert = [&](std::vector<std::vector<int>>& buckets, double pad) {
      const int x0 = bucket_of(b.lo.x - pad, grid_box_.lo.x, nx_), x1 = bucket_of(b.hi.x + pad, grid_box_.lo.x, nx_);
      const int y0 = bucket_of(b.lo.y - pad, grid_box_.lo.y, ny_), y1 = bucket_of(b.hi.y + pad, grid_box_.lo.y, ny_);
      for (int x = x0; x <= x1; ++x)
        for (int y = y0; y <= y1; ++y) buckets[static_cast<std::size_t>(x) * ny_ + y].push_back(static_cast<int>(i));
    };
    insert(cell_buckets_, 0.0);
    if (cells_[i].block >= 0) insert(support_buckets_, w);
  }
}

void Mesh::candidates(Point p, std::vector<int>& out) const {
  out.clear();
  if (!grid_box_.contains(p)) return;
  const double w = m_.halfwidth();
  const int x = bucket_of(p.x, grid_box_.lo.x, nx_), y = bucket_of(p.y, grid_box_.lo.y, ny_);
  for (int i : support_buckets_[static_cast<std::size_t>(x) * ny_ + y]) {
    const BoundingBox b = cells_[i].cell.bounds();
    if (p.x > b.lo.x - w && p.x < b.hi.x + w && p.y > b.lo.y - w && p.y < b.hi.y + w) out.push_back(i);
  }
}

void Mesh::cells_near(const BoundingBox& box, std::vector<int>& out) const {
  out.clear();
  const int x0 = bucket_of(box.lo.x, grid_box_.lo.x, nx_), x1 = bucket_of(box.hi.x, grid_box_.lo.x, nx_);
  const int y0 = bucket_of(box.lo.y, grid_box_.lo.y, ny_), y1 = bucket_of(box.hi.y, grid_box_.lo.y, ny_);
  for (int x = x0; x <= x1; ++x)
    for (int y = y0; y <= y1; ++y)
      for (int i : cell_buckets_[static_cast<std::size_t>(x) * ny_ + y])
        if (cells_[i].cell.bounds().overlaps(box)) out.push_back(i);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

namespace {

std::string format_point(Point p) {
  std::ostringstream os;
  os.precision(10);
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

} // namespace

Mesh build_mesh(const SignedDistance& domain, const Partition& partition, const MeshOptions& opts) {
  if (partition.cells.size() != partition.centers.size())
    throw InvalidArgument("partition needs one centre per cell");
  if (partition.cells.empty()) throw InvalidArgument("partition has no cells");
  if (opts.degree < 0 || opts.degree > 3) throw InvalidArgument("basis degree must be in [0, 3]");

  std::vector<MeshCell> cells(partition.cells.size());
  double domain_area = 0.0;
  int n_domain = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    MeshCell& c = cells[i];
    c.center = partition.centers[i];
    c.cell = partition.cells[i];
    c.label = classify_cell(c.cell, domain);
    if (c.label == CellLabel::interior)
      c.domain = c.cell;
    else if (c.label == CellLabel::cut)
      c.domain = clip_cell_to_domain(c.cell, domain);
    if (c.domain.empty()) c.label = CellLabel::exterior;
    if (c.label != CellLabel::exterior) {
      domain_area += c.domain.area();
      ++n_domain;
    }
  }
  if (n_domain == 0) throw InvalidArgument("no cell intersects the domain");
  const double h = std::sqrt(domain_area / n_domain);
  const double hm = opts.mollifier_support > 0.0 ? opts.mollifier_support : 2.0 * h;
  MollifierTensor m{opts.kind == MollifierKind::quartic ? Mollifier1D::quartic(hm)
                                                        : Mollifier1D::bspline(opts.bspline_degree, hm)};
  const Box unit_box = m.support_box({0.0, 0.0});

  // Provisional index over all cells for neighbour queries.
  for (MeshCell& c : cells) c.block = 0;
  Mesh probe(domain, cells, m, opts.degree, h);
  std::vector<int> near;

  // Boundary traces: domain polygon edges with both ends on φ = 0 whose
  // outer side is not covered by another integration polygon.
  const double phi_tol = 1e-8 * h, probe_dist = 1e-6 * h;
  int fallbacks = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    MeshCell& c = cells[i];
    if (c.label == CellLabel::exterior) continue;
    const ConvexPolygon& poly = c.domain;
    const std::size_t n = poly.size();
    std::vector<bool> on_boundary(n, false);
    for (std::size_t k = 0; k < n; ++k) {
      const Point a = poly[k], b = poly[(k + 1) % n];
      if (std::abs(domain(a)) > phi_tol || std::abs(domain(b)) > phi_tol) continue;
      const Point t = b - a;
      const double len = norm(t);
      const Point q = 0.5 * (a + b) + (probe_dist / len) * Point{t.y, -t.x};
      probe.cells_near({q, q}, near);
      bool covered = false;
      for (int j : near) {
        if (static_cast<std::size_t>(j) == i || cells[j].label == CellLabel::exterior) continue;
        if (cells[j].domain.contains(q, 0.0)) {
          covered = true;
          break;
        }
      }
      on_boundary[k] = !covered;
    }
    const Point centre = poly.centroid();
    for (std::size_t k = 0; k < n; ++k) {
      const Point a = poly[k], b = poly[(k + 1) % n];
      const Triangle tri{centre, a, b};
      if (on_boundary[k] && opts.curved) {
        const MidnodeProjection pr = project_midnodes(tri, domain, {false, true, false});
        if (pr.fallback) ++fallbacks;
        c.triangles.push_back(pr.triangle);
        c.boundary.push_back({a, pr.triangle.nodes[4], b});
      } else {
        c.triangles.push_back(CurvedTriangle::straight(tri));
        if (on_boundary[k]) c.boundary.push_back({a, 0.5 * (a + b), b});
      }
    }
  }

  // Supports, domain fractions and pruning.
  int blocks = 0;
  for (MeshCell& c : cells) {
    c.support = minkowski_sum(c.cell, unit_box);
    probe.cells_near(c.support.bounds(), near);
    double inside = 0.0;
    for (int j : near)
      if (cells[j].label != CellLabel::exterior) inside += overlap_area(c.support, cells[j].domain);
    c.support_fraction = std::min(1.0, inside / c.support.area());
    const bool active = c.label != CellLabel::exterior || inside > 1e-12 * c.support.area();
    if (c.label == CellLabel::exterior && active) c.label = CellLabel::ghost;
    c.block = active ? blocks++ : -1;
  }

  // Coverage: every mollifier box centred at a sample of domain points must
  // be tiled by the partition.
  for (const MeshCell& c : cells) {
    if (c.label != CellLabel::interior && c.label != CellLabel::cut) continue;
    std::vector<Point> samples(c.domain.vertices().begin(), c.domain.vertices().end());
    for (const CurvedTriangle& t : c.triangles) samples.push_back(t.map({1.0 / 3.0, 1.0 / 3.0}));
    for (const Point& p : samples) {
      const Box box = m.support_box(p);
      probe.cells_near(box.bounds(), near);
      double covered = 0.0;
      for (int j : near) covered += intersect_box(cells[j].cell, box).area();
      if (std::abs(covered - box.area()) > 1e-9 * box.area())
        throw CoverageError("mollifier box centred at " + format_point(p) +
                            " is not covered by the cells; add ghost seeds");
    }
  }

  Mesh mesh(domain, std::move(cells), m, opts.degree, h);
  mesh.projection_fallbacks = fallbacks;
  return mesh;
}

} // namespace mollified
