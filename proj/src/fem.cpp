#include "mollified/fem.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include <Eigen/SparseLU>

#include "mollified/errors.hpp"

namespace mollified {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MOLLIFIED_NUM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

template <class F>
void parallel_for(int n, int threads, F&& f) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  auto work = [&] {
    for (int i = next++; i < n && !failed; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

int default_domain_degree(int degree) {
  switch (degree) {
  case 0: return 1;
  case 1: return 2;
  case 2: return 3;
  default: return 4;
  }
}

struct Line {
  Point n;
  double c;
};

// Lines along which the basis functions of a cell lose smoothness.
std::vector<Line> kink_lines(const ConvexPolygon& cell, const Mollifier1D& m) {
  std::vector<Line> lines;
  const auto bps = m.breakpoints();
  const auto v = cell.vertices();
  for (Point p : v)
    for (double b : bps) {
      lines.push_back({{1.0, 0.0}, p.x + b});
      lines.push_back({{0.0, 1.0}, p.y + b});
    }
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Point d = v[(k + 1) % v.size()] - v[k];
    const Point n = (1.0 / norm(d)) * Point{d.y, -d.x};
    for (double b1 : bps)
      for (double b2 : bps) lines.push_back({n, dot(n, v[k] + Point{b1, b2})});
  }
  return lines;
}

std::vector<ConvexPolygon> split_polygon(const ConvexPolygon& poly, const std::vector<Line>& lines) {
  std::vector<ConvexPolygon> pieces{poly}, next;
  for (const Line& l : lines) {
    next.clear();
    for (const ConvexPolygon& p : pieces) {
      double lo = 1e300, hi = -1e300;
      for (Point x : p.vertices()) {
        lo = std::min(lo, dot(l.n, x) - l.c);
        hi = std::max(hi, dot(l.n, x) - l.c);
      }
      const double tol = 1e-12 * p.diameter();
      if (lo >= -tol || hi <= tol) {
        next.push_back(p);
        continue;
      }
      ConvexPolygon a = clip_halfplane(p, HalfPlane{l.n, l.c});
      ConvexPolygon b = clip_halfplane(p, HalfPlane{-1.0 * l.n, -l.c});
      if (!a.empty()) next.push_back(std::move(a));
      if (!b.empty()) next.push_back(std::move(b));
    }
    pieces.swap(next);
  }
  return pieces;
}

void split_points(const MeshCell& c, const std::vector<Line>& lines, int degree, CellPoints& out) {
  const TriangleRule tr = triangle_rule(degree);
  for (const ConvexPolygon& piece : split_polygon(c.domain, lines))
    for (const Triangle& t : triangulate(piece))
      for (const QuadraturePoint& q : map_rule(t, tr)) out.domain.push_back(q);
  const LineRule lr = segment_rule(degree / 2 + 1);
  for (const BoundarySegment& s : c.boundary) {
    if (distance(s.mid, 0.5 * (s.a + s.b)) > 1e-14 * distance(s.a, s.b))
      throw InvalidArgument("split quadrature needs straight boundary segments");
    std::vector<double> cuts{0.0, 1.0};
    for (const Line& l : lines) {
      const double fa = dot(l.n, s.a) - l.c, fb = dot(l.n, s.b) - l.c;
      if ((fa < 0.0) != (fb < 0.0) && fa != fb) cuts.push_back(fa / (fa - fb));
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i + 1] - cuts[i] < 1e-14) continue;
      const Point a = s.a + cuts[i] * (s.b - s.a), b = s.a + cuts[i + 1] * (s.b - s.a);
      for (const BoundaryPoint& bp : map_rule(BoundarySegment{a, 0.5 * (a + b), b}, lr)) out.boundary.push_back(bp);
    }
  }
}

struct RawEntry {
  int point, cell;
  std::vector<double> val;
  std::vector<std::array<double, 2>> grad;
};

void fill_values(const Mesh& mesh, const BasisEvaluator& ev, IntegrationPath path, const std::vector<Point>& xs,
                 std::vector<int>& active, std::vector<double>& val, std::vector<std::array<double, 2>>& grad) {
  const int nb = ev.size();
  std::vector<RawEntry> raw;
  std::vector<int> cand;
  BasisValue bv;
  for (int q = 0; q < static_cast<int>(xs.size()); ++q) {
    mesh.candidates(xs[q], cand);
    for (int j : cand) {
      const MeshCell& c = mesh.cells()[j];
      if (ev.evaluate(c.cell, c.center, xs[q], bv, path)) raw.push_back({q, j, bv.values, bv.gradients});
    }
  }
  std::vector<int> cells;
  for (const RawEntry& r : raw) cells.push_back(r.cell);
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  active = cells;
  const std::size_t na = active.size();
  val.assign(xs.size() * na * nb, 0.0);
  grad.assign(xs.size() * na * nb, {0.0, 0.0});
  for (const RawEntry& r : raw) {
    const std::size_t i = std::lower_bound(active.begin(), active.end(), r.cell) - active.begin();
    const std::size_t off = (r.point * na + i) * nb;
    std::copy(r.val.begin(), r.val.end(), val.begin() + off);
    std::copy(r.grad.begin(), r.grad.end(), grad.begin() + off);
  }
}

// Re-spreads per-point values computed over `from` onto the superset `to`.
void widen(const std::vector<int>& from, const std::vector<int>& to, std::size_t npts, int nb, std::vector<double>& val,
           std::vector<std::array<double, 2>>& grad) {
  if (from == to) return;
  std::vector<double> v(npts * to.size() * nb, 0.0);
  std::vector<std::array<double, 2>> g(npts * to.size() * nb, {0.0, 0.0});
  for (std::size_t i = 0; i < from.size(); ++i) {
    const std::size_t k = std::lower_bound(to.begin(), to.end(), from[i]) - to.begin();
    for (std::size_t q = 0; q < npts; ++q)
      for (int a = 0; a < nb; ++a) {
        v[(q * to.size() + k) * nb + a] = val[(q * from.size() + i) * nb + a];
        g[(q * to.size() + k) * nb + a] = grad[(q * from.size() + i) * nb + a];
      }
  }
  val.swap(v);
  grad.swap(g);
}

} // namespace

namespace {

// Basis functions of a cell count as present at a point when any value or
// gradient is non-zero; the correction lives on the same set.
bool in_support(const std::vector<double>& val, const std::vector<std::array<double, 2>>& grad, std::size_t off, int nb) {
  for (int a = 0; a < nb; ++a)
    if (val[off + a] != 0.0 || grad[off + a][0] != 0.0 || grad[off + a][1] != 0.0) return true;
  return false;
}

} // namespace

std::vector<CellPoints> tabulate(const Mesh& mesh, const AssemblyOptions& opts) {
  const auto& cells = mesh.cells();
  const int n = static_cast<int>(cells.size());
  const QuadratureOptions& qo = opts.quadrature;
  const int ddeg = qo.domain_degree >= 0 ? qo.domain_degree : default_domain_degree(mesh.degree());
  const TriangleRule trule = triangle_rule(ddeg);
  if (qo.boundary_points < 1) throw InvalidArgument("boundary rule needs at least one point");
  const LineRule lrule = segment_rule(qo.boundary_points);
  std::vector<Line> lines;
  BoundingBox split_box;
  if (qo.split_cell >= 0) {
    if (qo.split_cell >= n) throw InvalidArgument("split cell index out of range");
    lines = kink_lines(cells[qo.split_cell].cell, mesh.mollifier().factor);
    split_box = cells[qo.split_cell].support.bounds();
  }
  const BasisEvaluator ev(mesh.mollifier(), mesh.degree(), mesh.h());
  const int nb = ev.size();
  std::vector<CellPoints> out(n);
  parallel_for(n, resolve_threads(opts.threads), [&](int e) {
    const MeshCell& c = cells[e];
    if (c.label != CellLabel::interior && c.label != CellLabel::cut) return;
    CellPoints& cp = out[e];
    if (qo.split_cell >= 0 && c.domain.bounds().overlaps(split_box)) {
      split_points(c, lines, qo.split_degree, cp);
    } else {
      for (const CurvedTriangle& t : c.triangles)
        for (const QuadraturePoint& q : map_rule(t, trule)) cp.domain.push_back(q);
      for (const BoundarySegment& s : c.boundary)
        for (const BoundaryPoint& bp : map_rule(s, lrule)) cp.boundary.push_back(bp);
    }
    std::vector<Point> xd, xb;
    for (const auto& q : cp.domain) xd.push_back(q.x);
    for (const auto& q : cp.boundary) xb.push_back(q.x);
    std::vector<int> ad, ab;
    fill_values(mesh, ev, opts.path, xd, ad, cp.dval, cp.dgrad);
    fill_values(mesh, ev, opts.path, xb, ab, cp.bval, cp.bgrad);
    std::vector<int> all;
    std::set_union(ad.begin(), ad.end(), ab.begin(), ab.end(), std::back_inserter(all));
    widen(ad, all, xd.size(), nb, cp.dval, cp.dgrad);
    widen(ab, all, xb.size(), nb, cp.bval, cp.bgrad);
    cp.active = std::move(all);
  });
  return out;
}

namespace {

// Per integration cell partial sums of the correction systems.
struct VciPartial {
  std::vector<double> gram; // [active][n_psi²]
  std::vector<double> rhs;  // [active][nb * 2 * n_psi]
};

CellBasis psi_basis(const Mesh& mesh, int j) {
  return CellBasis(mesh.cells()[j].center, mesh.h(), mesh.degree() - 1);
}

VciPartial vci_partial(const Mesh& mesh, const CellPoints& cp, int nb, int npsi) {
  VciPartial p;
  const std::size_t na = cp.active.size();
  p.gram.assign(na * npsi * npsi, 0.0);
  p.rhs.assign(na * nb * 2 * npsi, 0.0);
  for (std::size_t i = 0; i < na; ++i) {
    const CellBasis pb = psi_basis(mesh, cp.active[i]);
    double* g = &p.gram[i * npsi * npsi];
    double* r = &p.rhs[i * nb * 2 * npsi];
    for (std::size_t q = 0; q < cp.domain.size(); ++q) {
      const std::size_t off = (q * na + i) * nb;
      if (!in_support(cp.dval, cp.dgrad, off, nb)) continue;
      const double w = cp.domain[q].weight;
      const BasisValue psi = monomials(pb, cp.domain[q].x);
      for (int b = 0; b < npsi; ++b)
        for (int c = 0; c < npsi; ++c) g[b * npsi + c] += w * psi.values[b] * psi.values[c];
      for (int a = 0; a < nb; ++a)
        for (int k = 0; k < 2; ++k)
          for (int b = 0; b < npsi; ++b)
            r[(a * 2 + k) * npsi + b] -=
                w * (cp.dval[off + a] * psi.gradients[b][k] + cp.dgrad[off + a][k] * psi.values[b]);
    }
    for (std::size_t q = 0; q < cp.boundary.size(); ++q) {
      const std::size_t off = (q * na + i) * nb;
      const BoundaryPoint& bp = cp.boundary[q];
      const BasisValue psi = monomials(pb, bp.x);
      const double nk[2] = {bp.normal.x, bp.normal.y};
      for (int a = 0; a < nb; ++a)
        for (int k = 0; k < 2; ++k)
          for (int b = 0; b < npsi; ++b)
            r[(a * 2 + k) * npsi + b] += bp.weight * cp.bval[off + a] * psi.values[b] * nk[k];
    }
  }
  return p;
}

} // namespace

VciCorrection vci_correct(const Mesh& mesh, const std::vector<CellPoints>& pts, int threads) {
  VciCorrection vci;
  if (mesh.degree() < 1) return vci;
  const int nb = basis_size(mesh.degree(), 2), npsi = basis_size(mesh.degree() - 1, 2);
  vci.n_psi = npsi;
  const int n = static_cast<int>(mesh.cells().size());
  std::vector<VciPartial> partial(n);
  parallel_for(n, resolve_threads(threads), [&](int e) { partial[e] = vci_partial(mesh, pts[e], nb, npsi); });

  std::vector<std::vector<double>> gram(n), rhs(n);
  for (int e = 0; e < n; ++e) {
    const auto& act = pts[e].active;
    for (std::size_t i = 0; i < act.size(); ++i) {
      auto& g = gram[act[i]];
      auto& r = rhs[act[i]];
      if (g.empty()) {
        g.assign(npsi * npsi, 0.0);
        r.assign(nb * 2 * npsi, 0.0);
      }
      for (int k = 0; k < npsi * npsi; ++k) g[k] += partial[e].gram[i * npsi * npsi + k];
      for (int k = 0; k < nb * 2 * npsi; ++k) r[k] += partial[e].rhs[i * nb * 2 * npsi + k];
    }
  }
  vci.lambda.assign(n, {});
  for (int j = 0; j < n; ++j) {
    if (gram[j].empty()) continue;
    const Eigen::Map<const Eigen::MatrixXd> g(gram[j].data(), npsi, npsi);
    const Eigen::Map<const Eigen::MatrixXd> r(rhs[j].data(), npsi, nb * 2);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
    const double scale = g.cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || lu.rank() < npsi || std::abs(lu.determinant()) < 1e-14 * std::pow(scale, npsi))
      throw SingularSystem("correction Gram matrix is singular for cell " + std::to_string(j));
    const Eigen::MatrixXd lam = lu.solve(r);
    vci.lambda[j].assign(lam.data(), lam.data() + lam.size());
  }
  return vci;
}

double vci_defect(const Mesh& mesh, const std::vector<CellPoints>& pts, const VciCorrection& vci) {
  if (mesh.degree() < 1) return 0.0;
  const int nb = basis_size(mesh.degree(), 2), npsi = basis_size(mesh.degree() - 1, 2);
  const int n = static_cast<int>(mesh.cells().size());
  std::vector<std::vector<double>> defect(n), scale(n);
  for (int e = 0; e < n; ++e) {
    const CellPoints& cp = pts[e];
    const std::size_t na = cp.active.size();
    for (std::size_t i = 0; i < na; ++i) {
      const int j = cp.active[i];
      auto& d = defect[j];
      auto& s = scale[j];
      if (d.empty()) {
        d.assign(nb * 2 * npsi, 0.0);
        s.assign(nb * 2 * npsi, 0.0);
      }
      const CellBasis pb = psi_basis(mesh, j);
      const std::vector<double>* lam = vci.lambda.empty() || vci.lambda[j].empty() ? nullptr : &vci.lambda[j];
      for (std::size_t q = 0; q < cp.domain.size(); ++q) {
        const std::size_t off = (q * na + i) * nb;
        if (!in_support(cp.dval, cp.dgrad, off, nb)) continue;
        const double w = cp.domain[q].weight;
        const BasisValue psi = monomials(pb, cp.domain[q].x);
        for (int a = 0; a < nb; ++a)
          for (int k = 0; k < 2; ++k) {
            double gk = cp.dgrad[off + a][k];
            if (lam)
              for (int c = 0; c < npsi; ++c) gk += (*lam)[(a * 2 + k) * npsi + c] * psi.values[c];
            for (int b = 0; b < npsi; ++b) {
              const double t1 = w * gk * psi.values[b], t2 = w * cp.dval[off + a] * psi.gradients[b][k];
              d[(a * 2 + k) * npsi + b] += t1 + t2;
              s[(a * 2 + k) * npsi + b] += std::abs(t1) + std::abs(t2);
            }
          }
      }
      for (std::size_t q = 0; q < cp.boundary.size(); ++q) {
        const std::size_t off = (q * na + i) * nb;
        const BoundaryPoint& bp = cp.boundary[q];
        const BasisValue psi = monomials(pb, bp.x);
        const double nk[2] = {bp.normal.x, bp.normal.y};
        for (int a = 0; a < nb; ++a)
          for (int k = 0; k < 2; ++k)
            for (int b = 0; b < npsi; ++b) {
              const double t = bp.weight * cp.bval[off + a] * psi.values[b] * nk[k];
              d[(a * 2 + k) * npsi + b] -= t;
              s[(a * 2 + k) * npsi + b] += std::abs(t);
            }
      }
    }
  }
  double worst = 0.0;
  for (int j = 0; j < n; ++j)
    for (std::size_t k = 0; k < defect[j].size(); ++k)
      if (scale[j][k] > 0.0) worst = std::max(worst, std::abs(defect[j][k]) / scale[j][k]);
  return worst;
}

namespace {

// Block-sparse pattern over dof blocks in CSR form.
struct Pattern {
  int nblocks = 0, bs = 0;
  std::vector<std::vector<int>> cols; // block columns per block row
  std::vector<long> row_start;        // scalar CSR offsets
  std::vector<int> inner;
  std::vector<double> values;

  long offset(int bi, int a, int bj) const {
    const auto& c = cols[bi];
    const long k = std::lower_bound(c.begin(), c.end(), bj) - c.begin();
    return row_start[static_cast<long>(bi) * bs + a] + k * bs;
  }
};

Pattern build_pattern(const Mesh& mesh, const std::vector<CellPoints>& pts, int bs) {
  Pattern p;
  p.nblocks = mesh.num_blocks();
  p.bs = bs;
  p.cols.assign(p.nblocks, {});
  for (const CellPoints& cp : pts)
    for (int i : cp.active)
      for (int j : cp.active) p.cols[mesh.cells()[i].block].push_back(mesh.cells()[j].block);
  for (auto& c : p.cols) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  const long n = static_cast<long>(p.nblocks) * bs;
  p.row_start.assign(n + 1, 0);
  for (int bi = 0; bi < p.nblocks; ++bi)
    for (int a = 0; a < bs; ++a) p.row_start[static_cast<long>(bi) * bs + a + 1] = static_cast<long>(p.cols[bi].size()) * bs;
  for (long r = 0; r < n; ++r) p.row_start[r + 1] += p.row_start[r];
  p.inner.resize(p.row_start[n]);
  for (int bi = 0; bi < p.nblocks; ++bi)
    for (int a = 0; a < bs; ++a) {
      long o = p.row_start[static_cast<long>(bi) * bs + a];
      for (int bj : p.cols[bi])
        for (int b = 0; b < bs; ++b) p.inner[o++] = bj * bs + b;
    }
  p.values.assign(p.inner.size(), 0.0);
  return p;
}

struct LocalSystem {
  Eigen::MatrixXd k;
  Eigen::VectorXd f;
};

LocalSystem local_system(const Mesh& mesh, const Problem& pr, const CellPoints& cp, const VciCorrection& vci, bool use_vci) {
  const int nb = basis_size(mesh.degree(), 2), nc = pr.components();
  const std::size_t na = cp.active.size();
  const int nloc = static_cast<int>(na) * nb * nc;
  const int npsi = vci.n_psi;
  LocalSystem ls{Eigen::MatrixXd::Zero(nloc, nloc), Eigen::VectorXd::Zero(nloc)};
  if (nloc == 0) return ls;
  const auto dmat = plane_stress(pr.material);
  Eigen::Matrix3d D;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) D(r, c) = dmat[r][c];

  std::vector<CellBasis> psi_cells;
  for (int j : cp.active) psi_cells.push_back(psi_basis(mesh, j));

  // Domain terms.
  const int nq = static_cast<int>(cp.domain.size());
  const int ns = nc == 1 ? 2 : 3; // rows of the gradient / strain operator
  Eigen::MatrixXd B(ns * nq, nloc), Bt(ns * nq, nloc), V(nc * nq, nloc);
  B.setZero();
  Bt.setZero();
  V.setZero();
  Eigen::VectorXd wgt(nq), src(nc * nq);
  for (int q = 0; q < nq; ++q) {
    const Point x = cp.domain[q].x;
    wgt(q) = cp.domain[q].weight;
    const auto s = pr.exact.source(x);
    for (int c = 0; c < nc; ++c) src(nc * q + c) = s[c];
    for (std::size_t i = 0; i < na; ++i) {
      const std::size_t off = (q * na + i) * nb;
      const int j = cp.active[i];
      const bool corr =
          use_vci && npsi > 0 && !vci.lambda[j].empty() && in_support(cp.dval, cp.dgrad, off, nb);
      BasisValue psi;
      if (corr) psi = monomials(psi_cells[i], x);
      for (int a = 0; a < nb; ++a) {
        const double v = cp.dval[off + a];
        const auto g = cp.dgrad[off + a];
        std::array<double, 2> gt = g;
        if (corr)
          for (int k = 0; k < 2; ++k)
            for (int c = 0; c < npsi; ++c) gt[k] += vci.lambda[j][(a * 2 + k) * npsi + c] * psi.values[c];
        const int l = (static_cast<int>(i) * nb + a) * nc;
        if (nc == 1) {
          V(q, l) = v;
          B(2 * q, l) = g[0];
          B(2 * q + 1, l) = g[1];
          Bt(2 * q, l) = gt[0];
          Bt(2 * q + 1, l) = gt[1];
        } else {
          V(2 * q, l) = v;
          V(2 * q + 1, l + 1) = v;
          B(3 * q, l) = g[0];
          B(3 * q + 2, l) = g[1];
          B(3 * q + 1, l + 1) = g[1];
          B(3 * q + 2, l + 1) = g[0];
          Bt(3 * q, l) = gt[0];
          Bt(3 * q + 2, l) = gt[1];
          Bt(3 * q + 1, l + 1) = gt[1];
          Bt(3 * q + 2, l + 1) = gt[0];
        }
      }
    }
  }
  Eigen::MatrixXd WB(ns * nq, nloc);
  for (int q = 0; q < nq; ++q) {
    if (nc == 1)
      WB.middleRows(2 * q, 2) = wgt(q) * B.middleRows(2 * q, 2);
    else
      WB.middleRows(3 * q, 3) = wgt(q) * (D * B.middleRows(3 * q, 3));
  }
  ls.k.noalias() += Bt.transpose() * WB;
  Eigen::VectorXd wsrc(nc * nq);
  for (int q = 0; q < nq; ++q)
    for (int c = 0; c < nc; ++c) wsrc(nc * q + c) = wgt(q) * src(nc * q + c);
  ls.f.noalias() += V.transpose() * wsrc;

  // Boundary terms.
  const int nbq = static_cast<int>(cp.boundary.size());
  for (int q = 0; q < nbq; ++q) {
    const BoundaryPoint& bp = cp.boundary[q];
    const FieldValue ex = pr.exact.field(bp.x);
    const bool neumann = pr.neumann && pr.neumann(bp.x, bp.normal);
    Eigen::MatrixXd Vb = Eigen::MatrixXd::Zero(nc, nloc), Tb = Eigen::MatrixXd::Zero(nc, nloc);
    for (std::size_t i = 0; i < na; ++i) {
      const std::size_t off = (q * na + i) * nb;
      for (int a = 0; a < nb; ++a) {
        const double v = cp.bval[off + a];
        const auto g = cp.bgrad[off + a];
        const int l = (static_cast<int>(i) * nb + a) * nc;
        if (nc == 1) {
          Vb(0, l) = v;
          Tb(0, l) = bp.normal.x * g[0] + bp.normal.y * g[1];
        } else {
          Vb(0, l) = v;
          Vb(1, l + 1) = v;
          // σ n for unit displacement in x and in y.
          const Eigen::Vector3d ex_(g[0], 0.0, g[1]), ey_(0.0, g[1], g[0]);
          const Eigen::Vector3d sx = D * ex_, sy = D * ey_;
          Tb(0, l) = sx(0) * bp.normal.x + sx(2) * bp.normal.y;
          Tb(1, l) = sx(2) * bp.normal.x + sx(1) * bp.normal.y;
          Tb(0, l + 1) = sy(0) * bp.normal.x + sy(2) * bp.normal.y;
          Tb(1, l + 1) = sy(2) * bp.normal.x + sy(1) * bp.normal.y;
        }
      }
    }
    Eigen::VectorXd ubar(nc), tbar(nc);
    if (nc == 1) {
      ubar(0) = ex.u[0];
      tbar(0) = bp.normal.x * ex.grad[0][0] + bp.normal.y * ex.grad[0][1];
    } else {
      ubar << ex.u[0], ex.u[1];
      const Eigen::Vector3d eps(ex.grad[0][0], ex.grad[1][1], ex.grad[0][1] + ex.grad[1][0]);
      const Eigen::Vector3d sig = D * eps;
      tbar << sig(0) * bp.normal.x + sig(2) * bp.normal.y, sig(2) * bp.normal.x + sig(1) * bp.normal.y;
    }
    const double w = bp.weight;
    if (neumann) {
      ls.f.noalias() += w * Vb.transpose() * tbar;
    } else {
      ls.k.noalias() -= w * Vb.transpose() * Tb;
      ls.k.noalias() += w * Tb.transpose() * Vb;
      ls.f.noalias() += w * Tb.transpose() * ubar;
    }
  }
  return ls;
}

} // namespace

DiscreteSystem assemble(const Mesh& mesh, const Problem& problem, const std::vector<CellPoints>& pts,
                        const VciCorrection& vci, const AssemblyOptions& opts) {
  const int nb = basis_size(mesh.degree(), 2), nc = problem.components();
  const int bs = nb * nc;
  if (problem.exact.components != nc) throw InvalidArgument("exact solution does not match the problem kind");
  Pattern pat = build_pattern(mesh, pts, bs);
  const long n = static_cast<long>(pat.nblocks) * bs;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const int ncell = static_cast<int>(pts.size());
  const int threads = resolve_threads(opts.threads);
  const int batch = std::max(1, 4 * threads);
  std::vector<LocalSystem> local(batch);
  const bool use_vci = opts.vci && !vci.lambda.empty();
  for (int start = 0; start < ncell; start += batch) {
    const int count = std::min(batch, ncell - start);
    parallel_for(count, threads, [&](int i) { local[i] = local_system(mesh, problem, pts[start + i], vci, use_vci); });
    // Deterministic merge in cell order.
    for (int i = 0; i < count; ++i) {
      const CellPoints& cp = pts[start + i];
      const LocalSystem& ls = local[i];
      const int na = static_cast<int>(cp.active.size());
      for (int ri = 0; ri < na; ++ri) {
        const int bi = mesh.cells()[cp.active[ri]].block;
        for (int a = 0; a < bs; ++a) {
          rhs(static_cast<long>(bi) * bs + a) += ls.f(ri * bs + a);
          for (int ci = 0; ci < na; ++ci) {
            const int bj = mesh.cells()[cp.active[ci]].block;
            double* dst = &pat.values[pat.offset(bi, a, bj)];
            for (int b = 0; b < bs; ++b) dst[b] += ls.k(ri * bs + a, ci * bs + b);
          }
        }
      }
      local[i] = {};
    }
  }
  DiscreteSystem sys;
  sys.block_size = bs;
  std::vector<int> outer(pat.row_start.begin(), pat.row_start.end());
  const Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor>> map(
      n, n, static_cast<long>(pat.values.size()), outer.data(), pat.inner.data(), pat.values.data());
  sys.matrix = map;
  sys.rhs = std::move(rhs);
  sys.scaling = Eigen::VectorXd::Ones(n);
  if (opts.cut_scaling)
    for (const MeshCell& c : mesh.cells())
      if (c.block >= 0 && c.support_fraction < 1.0)
        sys.scaling.segment(static_cast<long>(c.block) * bs, bs).setConstant(1.0 / std::sqrt(c.support_fraction));
  return sys;
}

Eigen::VectorXd solve_dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, SolveReport* report) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw InvalidArgument("system dimensions do not match");
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::MatrixXd& m = lu.matrixLU();
  const double big = m.diagonal().cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (!(std::abs(m(i, i)) > 1e-15 * big))
      throw SingularSystem("matrix is singular to working precision at pivot " + std::to_string(i));
  Eigen::VectorXd x = lu.solve(b);
  const double bn = std::max(b.norm(), 1e-300);
  double res = (a * x - b).norm() / bn;
  bool refined = false;
  if (res > 1e-10) {
    x += lu.solve(b - a * x);
    res = (a * x - b).norm() / bn;
    refined = true;
  }
  if (report) *report = {res, refined};
  return x;
}

Eigen::VectorXd solve(const DiscreteSystem& sys, SolveReport* report) {
  const Eigen::VectorXd& s = sys.scaling;
  Eigen::SparseMatrix<double> a = s.asDiagonal() * sys.matrix * s.asDiagonal();
  const Eigen::VectorXd b = s.asDiagonal() * sys.rhs;
  Eigen::VectorXd y;
  if (a.rows() <= 1500) {
    y = solve_dense(Eigen::MatrixXd(a), b, report);
  } else {
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) throw SingularSystem("sparse factorization failed: " + lu.lastErrorMessage());
    y = lu.solve(b);
    const double bn = std::max(b.norm(), 1e-300);
    double res = (a * y - b).norm() / bn;
    bool refined = false;
    if (res > 1e-10) {
      y += lu.solve(b - a * y);
      res = (a * y - b).norm() / bn;
      refined = true;
    }
    if (report) *report = {res, refined};
  }
  return s.asDiagonal() * y;
}

namespace {

FieldValue evaluate_with(const Mesh& mesh, const BasisEvaluator& ev, const Eigen::VectorXd& coeffs, int components,
                         Point p, IntegrationPath path) {
  const int nb = ev.size();
  FieldValue out;
  std::vector<int> cand;
  mesh.candidates(p, cand);
  BasisValue bv;
  for (int j : cand) {
    const MeshCell& c = mesh.cells()[j];
    if (!ev.evaluate(c.cell, c.center, p, bv, path)) continue;
    for (int a = 0; a < nb; ++a)
      for (int k = 0; k < components; ++k) {
        const double alpha = coeffs((static_cast<long>(c.block) * nb + a) * components + k);
        out.u[k] += alpha * bv.values[a];
        out.grad[k][0] += alpha * bv.gradients[a][0];
        out.grad[k][1] += alpha * bv.gradients[a][1];
      }
  }
  return out;
}

} // namespace

FieldValue evaluate_solution(const Mesh& mesh, const Eigen::VectorXd& coeffs, int components, Point p,
                             IntegrationPath path) {
  const BasisEvaluator ev(mesh.mollifier(), mesh.degree(), mesh.h());
  return evaluate_with(mesh, ev, coeffs, components, p, path);
}

ErrorNorms error_norms(const Mesh& mesh, const Problem& problem, const Eigen::VectorXd& coeffs, int degree,
                       int threads) {
  const int deg_m = mesh.mollifier().factor.degree();
  if (degree < 0) degree = 2 * (mesh.degree() + deg_m + 1);
  const TriangleRule rule = triangle_rule(degree);
  const int nc = problem.components();
  const auto dmat = plane_stress(problem.material);
  const int n = static_cast<int>(mesh.cells().size());
  std::vector<std::array<double, 3>> part(n, {0.0, 0.0, 0.0});
  const BasisEvaluator ev(mesh.mollifier(), mesh.degree(), mesh.h());
  parallel_for(n, resolve_threads(threads), [&](int e) {
    const MeshCell& c = mesh.cells()[e];
    for (const CurvedTriangle& t : c.triangles)
      for (const QuadraturePoint& q : map_rule(t, rule)) {
        const FieldValue uh = evaluate_with(mesh, ev, coeffs, nc, q.x, IntegrationPath::divergence);
        const FieldValue ex = problem.exact.field(q.x);
        double l2 = 0.0, h1 = 0.0, en = 0.0;
        std::array<std::array<double, 2>, 2> de{};
        for (int k = 0; k < nc; ++k) {
          const double d = ex.u[k] - uh.u[k];
          l2 += d * d;
          for (int x = 0; x < 2; ++x) {
            de[k][x] = ex.grad[k][x] - uh.grad[k][x];
            h1 += de[k][x] * de[k][x];
          }
        }
        if (nc == 1) {
          en = h1;
        } else {
          const double eps[3] = {de[0][0], de[1][1], de[0][1] + de[1][0]};
          for (int r = 0; r < 3; ++r)
            for (int s = 0; s < 3; ++s) en += eps[r] * dmat[r][s] * eps[s];
        }
        part[e][0] += q.weight * l2;
        part[e][1] += q.weight * h1;
        part[e][2] += q.weight * en;
      }
  });
  std::array<double, 3> sum{0.0, 0.0, 0.0};
  for (const auto& p : part)
    for (int k = 0; k < 3; ++k) sum[k] += p[k];
  return {std::sqrt(sum[0]), std::sqrt(sum[1]), std::sqrt(sum[2])};
}

SolveResult run_problem(const Mesh& mesh, const Problem& problem, const AssemblyOptions& opts) {
  const std::vector<CellPoints> pts = tabulate(mesh, opts);
  const VciCorrection vci = opts.vci ? vci_correct(mesh, pts, opts.threads) : VciCorrection{};
  const DiscreteSystem sys = assemble(mesh, problem, pts, vci, opts);
  SolveResult r;
  r.coeffs = solve(sys, &r.report);
  r.n_dof = static_cast<int>(r.coeffs.size());
  r.errors = error_norms(mesh, problem, r.coeffs, -1, opts.threads);
  return r;
}

Eigen::VectorXd interpolate_polynomial(const Mesh& mesh, const std::vector<Poly2>& g) {
  const int nc = static_cast<int>(g.size());
  const int nb = basis_size(mesh.degree(), 2);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<long>(mesh.num_blocks()) * nb * nc);
  for (int k = 0; k < nc; ++k) {
    const Poly2 pre = reproduction_coefficients(g[k], mesh.mollifier());
    for (const MeshCell& c : mesh.cells()) {
      if (c.block < 0) continue;
      const std::vector<double> a = cell_coefficients(pre, CellBasis(c.center, mesh.h(), mesh.degree()));
      for (int i = 0; i < nb; ++i) x((static_cast<long>(c.block) * nb + i) * nc + k) = a[i];
    }
  }
  return x;
}

} // namespace mollified
