#include "mollified/fem1d.hpp"

#include <algorithm>
#include <cmath>

#include "mollified/errors.hpp"
#include "mollified/quadrature.hpp"

namespace mollified {

Mesh1D build_mesh_1d(const std::vector<double>& widths, const Mesh1DOptions& opts) {
  if (widths.empty()) throw InvalidArgument("1D mesh needs at least one cell");
  if (opts.degree < 0 || opts.degree > 3) throw InvalidArgument("polynomial degree must be in 0..3");
  if (!(opts.chi > 0.0)) throw InvalidArgument("mollifier width factor must be positive");
  double hmax = 0.0, total = 0.0;
  for (double w : widths) {
    if (!(w > 0.0)) throw InvalidArgument("cell widths must be positive");
    hmax = std::max(hmax, w);
    total += w;
  }
  const double hm = 2.0 * opts.chi * hmax;
  Mesh1D m;
  m.mollifier = opts.kind == MollifierKind::quartic ? Mollifier1D::quartic(hm)
                                                     : Mollifier1D::bspline(opts.mollifier_degree, hm);
  m.degree = opts.degree;
  m.scale = total / static_cast<double>(widths.size());
  m.lo = 0.0;
  m.cells.push_back({-0.5 * hm, 0.0});
  double x = 0.0;
  for (double w : widths) {
    m.cells.push_back({x, x + w});
    x += w;
  }
  m.hi = x;
  m.cells.push_back({x, x + 0.5 * hm});
  return m;
}

std::vector<double> bisect(const std::vector<double>& widths) {
  std::vector<double> out;
  out.reserve(2 * widths.size());
  for (double w : widths) out.insert(out.end(), {0.5 * w, 0.5 * w});
  return out;
}

std::vector<double> default_cells_1d() { return {0.15, 0.2, 0.15, 0.15, 0.2, 0.15}; }

namespace {

// Abscissae in [lo, hi] where some basis function changes polynomial piece.
std::vector<double> breakpoints(const Mesh1D& mesh) {
  std::vector<double> xs{mesh.lo, mesh.hi};
  const auto bps = mesh.mollifier.breakpoints();
  for (const Interval& c : mesh.cells)
    for (double e : {c.lo, c.hi})
      for (double b : bps) {
        const double x = e + b;
        if (x > mesh.lo && x < mesh.hi) xs.push_back(x);
      }
  std::sort(xs.begin(), xs.end());
  const double tol = 1e-13 * (mesh.hi - mesh.lo);
  std::vector<double> out;
  for (double x : xs)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  out.back() = mesh.hi;
  return out;
}

struct Point1D {
  double x, w;
};

std::vector<Point1D> points(const Mesh1D& mesh, int extra) {
  const int n = gauss_points_for_degree(2 * (mesh.degree + mesh.mollifier.degree() + 1)) + extra;
  const LineRule r = segment_rule(n);
  const auto xs = breakpoints(mesh);
  std::vector<Point1D> out;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double a = xs[i], len = xs[i + 1] - xs[i];
    for (std::size_t q = 0; q < r.points.size(); ++q) out.push_back({a + len * r.points[q], len * r.weights[q]});
  }
  return out;
}

// Basis values at x: (dof offset, values, derivatives) per cell overlapping
// the mollifier window.
struct Active {
  int offset;
  BasisValue v;
};

void active_at(const Mesh1D& mesh, double x, std::vector<Active>& out) {
  out.clear();
  const double w = mesh.mollifier.halfwidth();
  const int nb = mesh.degree + 1;
  for (std::size_t j = 0; j < mesh.cells.size(); ++j) {
    const Interval& c = mesh.cells[j];
    if (c.hi <= x - w || c.lo >= x + w) continue;
    const CellBasis cb({c.center(), 0.0}, mesh.scale, mesh.degree, 1);
    out.push_back({static_cast<int>(j) * nb, eval_1d(cb, c, mesh.mollifier, x)});
  }
}

} // namespace

std::array<double, 2> evaluate_1d(const Mesh1D& mesh, const Eigen::VectorXd& coeffs, double x) {
  std::vector<Active> act;
  active_at(mesh, x, act);
  std::array<double, 2> r{0.0, 0.0};
  for (const Active& a : act)
    for (std::size_t k = 0; k < a.v.values.size(); ++k) {
      r[0] += coeffs[a.offset + k] * a.v.values[k];
      r[1] += coeffs[a.offset + k] * a.v.gradients[k][0];
    }
  return r;
}

Solve1DResult solve_poisson_1d(const Mesh1D& mesh, const Exact1D& exact) {
  const int nb = mesh.degree + 1;
  const int n = static_cast<int>(mesh.cells.size()) * nb;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  std::vector<Active> act;
  for (const Point1D& q : points(mesh, 4)) {
    active_at(mesh, q.x, act);
    const double s = exact.source(q.x);
    for (const Active& ti : act)
      for (int i = 0; i < nb; ++i) {
        const double dv = ti.v.gradients[i][0];
        b[ti.offset + i] += q.w * s * ti.v.values[i];
        for (const Active& tj : act)
          for (int j = 0; j < nb; ++j) a(ti.offset + i, tj.offset + j) += q.w * dv * tj.v.gradients[j][0];
      }
  }
  // -(n u') v + u (n v') = ū (n v') at both ends.
  for (const auto& [x, nx] : {std::pair{mesh.lo, -1.0}, std::pair{mesh.hi, 1.0}}) {
    active_at(mesh, x, act);
    const double ub = exact.u(x);
    for (const Active& ti : act)
      for (int i = 0; i < nb; ++i) {
        const double v = ti.v.values[i], dv = nx * ti.v.gradients[i][0];
        b[ti.offset + i] += ub * dv;
        for (const Active& tj : act)
          for (int j = 0; j < nb; ++j)
            a(ti.offset + i, tj.offset + j) += -nx * tj.v.gradients[j][0] * v + tj.v.values[j] * dv;
      }
  }
  Solve1DResult r;
  r.n_dof = n;
  r.coeffs = solve_dense(a, b, &r.report);
  r.errors = error_norms_1d(mesh, exact, r.coeffs);
  return r;
}

ErrorNorms error_norms_1d(const Mesh1D& mesh, const Exact1D& exact, const Eigen::VectorXd& coeffs) {
  double l2 = 0.0, h1 = 0.0;
  for (const Point1D& q : points(mesh, 6)) {
    const auto uh = evaluate_1d(mesh, coeffs, q.x);
    const double e0 = exact.u(q.x) - uh[0], e1 = exact.du(q.x) - uh[1];
    l2 += q.w * e0 * e0;
    h1 += q.w * e1 * e1;
  }
  return {std::sqrt(l2), std::sqrt(h1), std::sqrt(h1)};
}

} // namespace mollified
