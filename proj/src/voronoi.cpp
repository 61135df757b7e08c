#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mollified/errors.hpp"
#include "mollified/geometry.hpp"

namespace mollified {

namespace {

// Uniform bucket grid over the seeds; bisectors are visited ring by ring so
// that clipping stops once no remaining seed can cut the cell.
class SeedGrid {
public:
  SeedGrid(std::span<const Point> seeds, const BoundingBox& bounds) : seeds_(seeds), lo_(bounds.lo) {
    const double w = bounds.hi.x - bounds.lo.x;
    const double h = bounds.hi.y - bounds.lo.y;
    const double per_bucket = 2.0;
    const double cell = std::sqrt(w * h * per_bucket / static_cast<double>(seeds.size()));
    size_ = std::max(cell, 1e-300);
    nx_ = std::max(1, static_cast<int>(std::ceil(w / size_)));
    ny_ = std::max(1, static_cast<int>(std::ceil(h / size_)));
    buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const auto [bx, by] = bucket_of(seeds[i]);
      buckets_[static_cast<std::size_t>(by) * nx_ + bx].push_back(i);
    }
  }

  std::pair<int, int> bucket_of(Point p) const {
    const int bx = std::clamp(static_cast<int>((p.x - lo_.x) / size_), 0, nx_ - 1);
    const int by = std::clamp(static_cast<int>((p.y - lo_.y) / size_), 0, ny_ - 1);
    return {bx, by};
  }

  int max_ring() const { return std::max(nx_, ny_); }
  double bucket_size() const { return size_; }

  // Seeds in buckets at Chebyshev distance exactly r from (bx, by).
  void ring(int bx, int by, int r, std::vector<std::size_t>& out) const {
    out.clear();
    for (int y = by - r; y <= by + r; ++y) {
      if (y < 0 || y >= ny_) continue;
      const bool edge_row = (y == by - r || y == by + r);
      for (int x = bx - r; x <= bx + r; x += (edge_row || r == 0) ? 1 : 2 * r) {
        if (x < 0 || x >= nx_) continue;
        const auto& b = buckets_[static_cast<std::size_t>(y) * nx_ + x];
        out.insert(out.end(), b.begin(), b.end());
      }
    }
  }

private:
  std::span<const Point> seeds_;
  Point lo_;
  double size_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;
};

double max_vertex_distance(const ConvexPolygon& poly, Point c) {
  double d = 0.0;
  for (const Point& v : poly.vertices()) d = std::max(d, distance(v, c));
  return d;
}

} // namespace

VoronoiDiagram voronoi(std::span<const Point> seeds, const BoundingBox& bounds) {
  if (seeds.empty()) throw InvalidArgument("voronoi: no seeds");
  if (!(bounds.hi.x > bounds.lo.x && bounds.hi.y > bounds.lo.y)) throw InvalidArgument("voronoi: empty bounds");
  const double diam = distance(bounds.lo, bounds.hi);
  for (const Point& s : seeds)
    if (!bounds.contains(s)) throw InvalidArgument("voronoi: seed outside bounds");

  SeedGrid grid(seeds, bounds);
  const ConvexPolygon box = ConvexPolygon::rectangle(bounds.lo, bounds.hi);
  const double dup_tol = kGeomEps * diam;

  VoronoiDiagram vd;
  vd.seeds.assign(seeds.begin(), seeds.end());
  vd.cells.resize(seeds.size());
  vd.labels.assign(seeds.size(), CellLabel::interior);

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const Point c = seeds[i];
    ConvexPolygon cell = box;
    const auto [bx, by] = grid.bucket_of(c);
    for (int r = 0; r <= grid.max_ring(); ++r) {
      // Seeds in ring r are at least (r - 1) bucket widths away.
      const double nearest_possible = std::max(0, r - 1) * grid.bucket_size();
      if (0.5 * nearest_possible > max_vertex_distance(cell, c)) break;
      grid.ring(bx, by, r, candidates);
      std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        const double da = distance(seeds[a], c), db = distance(seeds[b], c);
        return da < db || (da == db && a < b);
      });
      for (std::size_t j : candidates) {
        if (j == i) continue;
        const Point d = seeds[j] - c;
        const double len = norm(d);
        if (len <= dup_tol)
          throw DegenerateGeometry("voronoi: duplicate seeds " + std::to_string(i) + " and " + std::to_string(j));
        if (0.5 * len > max_vertex_distance(cell, c)) continue;
        const Point n = (1.0 / len) * d;
        cell = clip_halfplane(cell, HalfPlane{n, dot(n, 0.5 * (c + seeds[j]))});
      }
    }
    vd.cells[i] = std::move(cell);
  }
  return vd;
}

VoronoiDiagram voronoi(std::span<const Point> seeds, const Box& bounds) { return voronoi(seeds, bounds.bounds()); }

} // namespace mollified
