#include "mollified/basis.hpp"

#include <algorithm>
#include <cmath>

#include "mollified/errors.hpp"
#include "mollified/quadrature.hpp"

namespace mollified {

CellBasis::CellBasis(Point center, double scale, int degree, int dim)
    : center_(center), scale_(scale), degree_(degree), dim_(dim) {
  if (degree < 0) throw InvalidArgument("basis degree must be non-negative");
  if (dim != 1 && dim != 2) throw InvalidArgument("basis dimension must be 1 or 2");
  if (!(scale > 0.0)) throw InvalidArgument("basis scale must be positive");
  if (dim == 1) {
    for (int a = 0; a <= degree; ++a) exponents_.push_back({a, 0});
  } else {
    for (int total = 0; total <= degree; ++total)
      for (int a = total; a >= 0; --a) exponents_.push_back({a, total - a});
  }
}

BasisValue monomials(const CellBasis& cb, Point p) {
  const double s = 2.0 / cb.scale();
  const double xi = s * (p.x - cb.center().x);
  const double eta = cb.dim() == 2 ? s * (p.y - cb.center().y) : 0.0;
  BasisValue out;
  out.reset(cb.size());
  const auto ipow = [](double v, int k) { return k <= 0 ? 1.0 : std::pow(v, k); };
  int k = 0;
  for (const auto& [a, b] : cb.exponents()) {
    out.values[k] = ipow(xi, a) * ipow(eta, b);
    out.gradients[k][0] = a == 0 ? 0.0 : s * a * ipow(xi, a - 1) * ipow(eta, b);
    out.gradients[k][1] = b == 0 ? 0.0 : s * b * ipow(xi, a) * ipow(eta, b - 1);
    ++k;
  }
  return out;
}

BasisValue eval_1d(const CellBasis& cb, Interval cell, const Mollifier1D& m, double x) {
  BasisValue out;
  out.reset(cb.size());
  const double w = m.halfwidth();
  const double lo = std::max(cell.lo, x - w), hi = std::min(cell.hi, x + w);
  if (!(hi > lo)) return out;

  // Breakpoints of y -> m(x - y) lie at y = x - b.
  std::vector<double> cuts{lo, hi};
  for (double b : m.breakpoints()) {
    const double y = x - b;
    if (y > lo && y < hi) cuts.push_back(y);
  }
  std::sort(cuts.begin(), cuts.end());

  const LineRule rule = gauss_interval(gauss_points_for_degree(m.degree() + cb.degree()));
  const double s = 2.0 / cb.scale();
  const int n = cb.size();
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double mid = 0.5 * (cuts[c] + cuts[c + 1]), half = 0.5 * (cuts[c + 1] - cuts[c]);
    if (!(half > 0.0)) continue;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double y = mid + half * rule.points[q];
      const double wt = half * rule.weights[q];
      const double mv = m.eval(x - y), md = m.deriv(x - y, 1);
      const double xi = s * (y - cb.center().x);
      double pw = 1.0;
      for (int k = 0; k < n; ++k) {
        out.values[k] += wt * mv * pw;
        out.gradients[k][0] += wt * md * pw;
        pw *= xi;
      }
    }
  }
  return out;
}

namespace {

// Sutherland–Hodgman against one axis-aligned bound. keep_below selects
// coord <= v, otherwise coord >= v.
void clip_axis(std::vector<Point>& poly, std::vector<Point>& scratch, int axis, double v, bool keep_below) {
  scratch.clear();
  const std::size_t n = poly.size();
  const auto coord = [axis](Point p) { return axis == 0 ? p.x : p.y; };
  const auto inside = [&](Point p) { return keep_below ? coord(p) <= v : coord(p) >= v; };
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = poly[i], b = poly[(i + 1) % n];
    const bool ia = inside(a), ib = inside(b);
    if (ia) scratch.push_back(a);
    if (ia != ib) {
      const double t = (v - coord(a)) / (coord(b) - coord(a));
      Point q = a + t * (b - a);
      if (axis == 0)
        q.x = v;
      else
        q.y = v;
      scratch.push_back(q);
    }
  }
  poly.swap(scratch);
}

double shoelace(const std::vector<Point>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * a;
}

void moments_divergence(const std::vector<Point>& poly, int max_a, int max_b, std::vector<double>& mu) {
  const int stride = max_b + 1;
  mu.assign((max_a + 1) * stride, 0.0);
  const LineRule& rule = [&]() -> const LineRule& {
    thread_local std::vector<LineRule> cache;
    const int n = gauss_points_for_degree(max_a + max_b + 1);
    if (static_cast<int>(cache.size()) <= n) cache.resize(n + 1);
    if (cache[n].points.empty()) cache[n] = segment_rule(n);
    return cache[n];
  }();
  std::vector<double> xp(max_a + 2), yp(max_b + 1);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point A = poly[i], B = poly[(i + 1) % poly.size()];
    const double dy = B.y - A.y;
    if (dy == 0.0) continue;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = rule.points[q];
      const double x = A.x + s * (B.x - A.x), y = A.y + s * dy;
      const double wt = rule.weights[q] * dy;
      xp[0] = 1.0;
      for (int a = 1; a <= max_a + 1; ++a) xp[a] = xp[a - 1] * x;
      yp[0] = 1.0;
      for (int b = 1; b <= max_b; ++b) yp[b] = yp[b - 1] * y;
      for (int a = 0; a <= max_a; ++a) {
        const double fa = wt * xp[a + 1] / (a + 1);
        for (int b = 0; b <= max_b; ++b) mu[a * stride + b] += fa * yp[b];
      }
    }
  }
}

void moments_triangulation(const std::vector<Point>& poly, int max_a, int max_b, std::vector<double>& mu) {
  const int stride = max_b + 1;
  mu.assign((max_a + 1) * stride, 0.0);
  Point c{0.0, 0.0};
  for (const Point& v : poly) c = c + v;
  c = (1.0 / static_cast<double>(poly.size())) * c;
  const TriangleRule rule = triangle_rule(max_a + max_b);
  std::vector<double> xp(max_a + 1), yp(max_b + 1);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point A = poly[i], B = poly[(i + 1) % poly.size()];
    const double jac = cross(A - c, B - c);
    if (jac == 0.0) continue;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Point r = rule.points[q];
      const Point x = c + r.x * (A - c) + r.y * (B - c);
      const double wt = rule.weights[q] * jac;
      xp[0] = 1.0;
      for (int a = 1; a <= max_a; ++a) xp[a] = xp[a - 1] * x.x;
      yp[0] = 1.0;
      for (int b = 1; b <= max_b; ++b) yp[b] = yp[b - 1] * x.y;
      for (int a = 0; a <= max_a; ++a)
        for (int b = 0; b <= max_b; ++b) mu[a * stride + b] += wt * xp[a] * yp[b];
    }
  }
}

void compute_moments(const std::vector<Point>& poly, int max_a, int max_b, IntegrationPath path,
                     std::vector<double>& mu) {
  if (path == IntegrationPath::divergence)
    moments_divergence(poly, max_a, max_b, mu);
  else
    moments_triangulation(poly, max_a, max_b, mu);
}

} // namespace

std::vector<double> polygon_moments(const ConvexPolygon& omega, int max_a, int max_b, IntegrationPath path) {
  std::vector<double> mu;
  if (omega.empty()) {
    mu.assign((max_a + 1) * (max_b + 1), 0.0);
    return mu;
  }
  std::vector<Point> verts(omega.vertices().begin(), omega.vertices().end());
  compute_moments(verts, max_a, max_b, path, mu);
  return mu;
}

BasisEvaluator::BasisEvaluator(const MollifierTensor& m, int degree, double scale)
    : m_(m), degree_(degree), scale_(scale), n_(basis_size(degree, 2)) {
  if (degree < 0) throw InvalidArgument("basis degree must be non-negative");
  if (!(scale > 0.0)) throw InvalidArgument("basis scale must be positive");
  const CellBasis proto({0.0, 0.0}, scale, degree);
  exponents_.assign(proto.exponents().begin(), proto.exponents().end());
  const double w = m.halfwidth();
  for (const MollifierPiece& piece : m.factor.shape_pieces()) {
    // t = -z; value (1/w) g(-t), derivative in p is (1/w^2) g'(-t).
    poly::Coeffs v = poly::compose_affine(piece.coeffs, 0.0, -1.0);
    for (double& c : v) c /= w;
    poly::Coeffs d = poly::compose_affine(poly::derivative(piece.coeffs), 0.0, -1.0);
    for (double& c : d) c /= w * w;
    pieces_.push_back({-piece.z1, -piece.z0, std::move(v), std::move(d)});
  }
  std::reverse(pieces_.begin(), pieces_.end());
}

bool BasisEvaluator::evaluate(const ConvexPolygon& cell, Point center, Point p, BasisValue& out,
                              IntegrationPath path) const {
  out.reset(n_);
  if (cell.empty()) return false;
  const double w = m_.halfwidth();

  thread_local std::vector<Point> local, piece_poly, scratch;
  thread_local std::vector<double> mu;
  local.clear();
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const Point& v : cell.vertices()) {
    const Point t{(v.x - p.x) / w, (v.y - p.y) / w};
    xmin = std::min(xmin, t.x), xmax = std::max(xmax, t.x);
    ymin = std::min(ymin, t.y), ymax = std::max(ymax, t.y);
    local.push_back(t);
  }
  if (xmin >= 1.0 || xmax <= -1.0 || ymin >= 1.0 || ymax <= -1.0) return false;

  const double r = 2.0 * w / scale_;
  const double u0x = 2.0 * (p.x - center.x) / scale_, u0y = 2.0 * (p.y - center.y) / scale_;
  std::vector<poly::Coeffs> px(degree_ + 1), py(degree_ + 1);
  for (int a = 0; a <= degree_; ++a) {
    px[a] = poly::affine_power(u0x, r, a);
    py[a] = poly::affine_power(u0y, r, a);
  }

  const double tiny = 1e-14;
  bool any = false;
  for (const PieceT& qx : pieces_) {
    if (qx.t1 <= xmin || qx.t0 >= xmax) continue;
    for (const PieceT& qy : pieces_) {
      if (qy.t1 <= ymin || qy.t0 >= ymax) continue;
      piece_poly = local;
      if (xmin < qx.t0) clip_axis(piece_poly, scratch, 0, qx.t0, false);
      if (piece_poly.size() >= 3 && xmax > qx.t1) clip_axis(piece_poly, scratch, 0, qx.t1, true);
      if (piece_poly.size() >= 3 && ymin < qy.t0) clip_axis(piece_poly, scratch, 1, qy.t0, false);
      if (piece_poly.size() >= 3 && ymax > qy.t1) clip_axis(piece_poly, scratch, 1, qy.t1, true);
      if (piece_poly.size() < 3 || std::abs(shoelace(piece_poly)) <= tiny) continue;
      any = true;

      // Moments about the piece's vertex mean limit cancellation when the
      // overlap is small compared to the box.
      Point s0{0.0, 0.0};
      for (const Point& v : piece_poly) s0 = s0 + v;
      s0 = (1.0 / static_cast<double>(piece_poly.size())) * s0;
      for (Point& v : piece_poly) v = v - s0;

      const int dx = static_cast<int>(qx.value.size()) - 1 + degree_;
      const int dy = static_cast<int>(qy.value.size()) - 1 + degree_;
      compute_moments(piece_poly, dx, dy, path, mu);
      const int stride = dy + 1;

      // Contract the x index first: Mx[α][b] = Σ_a A_α[a] μ[a][b].
      std::vector<std::vector<double>> mx(degree_ + 1, std::vector<double>(stride, 0.0));
      std::vector<std::vector<double>> mdx(degree_ + 1, std::vector<double>(stride, 0.0));
      for (int al = 0; al <= degree_; ++al) {
        const poly::Coeffs A = poly::compose_affine(poly::multiply(qx.value, px[al]), s0.x, 1.0);
        const poly::Coeffs dA = poly::compose_affine(poly::multiply(qx.deriv, px[al]), s0.x, 1.0);
        for (std::size_t a = 0; a < A.size(); ++a)
          for (int b = 0; b <= dy; ++b) mx[al][b] += A[a] * mu[a * stride + b];
        for (std::size_t a = 0; a < dA.size(); ++a)
          for (int b = 0; b <= dy; ++b) mdx[al][b] += dA[a] * mu[a * stride + b];
      }
      std::vector<poly::Coeffs> B(degree_ + 1), dB(degree_ + 1);
      for (int be = 0; be <= degree_; ++be) {
        B[be] = poly::compose_affine(poly::multiply(qy.value, py[be]), s0.y, 1.0);
        dB[be] = poly::compose_affine(poly::multiply(qy.deriv, py[be]), s0.y, 1.0);
      }
      for (int k = 0; k < n_; ++k) {
        const auto [al, be] = exponents_[k];
        double v = 0.0, gx = 0.0, gy = 0.0;
        for (std::size_t b = 0; b < B[be].size(); ++b) {
          v += mx[al][b] * B[be][b];
          gx += mdx[al][b] * B[be][b];
        }
        for (std::size_t b = 0; b < dB[be].size(); ++b) gy += mx[al][b] * dB[be][b];
        out.values[k] += v;
        out.gradients[k][0] += gx;
        out.gradients[k][1] += gy;
      }
    }
  }
  if (!any) return false;
  const double jac = w * w;
  for (int k = 0; k < n_; ++k) {
    out.values[k] *= jac;
    out.gradients[k][0] *= jac;
    out.gradients[k][1] *= jac;
  }
  return true;
}

BasisValue eval_2d(const CellBasis& cb, const ConvexPolygon& cell, const MollifierTensor& m, Point p,
                   IntegrationPath path) {
  const BasisEvaluator ev(m, cb.degree(), cb.scale());
  BasisValue out;
  ev.evaluate(cell, cb.center(), p, out, path);
  return out;
}

SupportRegion support(const ConvexPolygon& cell, const MollifierTensor& m) {
  return {minkowski_sum(cell, m.support_box({0.0, 0.0}))};
}

double Poly2::operator()(Point p) const {
  double r = 0.0, xa = 1.0;
  for (int a = 0; a <= degree; ++a) {
    double yb = 1.0;
    for (int b = 0; b <= degree; ++b) {
      r += at(a, b) * xa * yb;
      yb *= p.y;
    }
    xa *= p.x;
  }
  return r;
}

std::array<double, 2> Poly2::gradient(Point p) const {
  std::array<double, 2> g{0.0, 0.0};
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; b <= degree; ++b) {
      const double c = at(a, b);
      if (c == 0.0) continue;
      if (a > 0) g[0] += c * a * std::pow(p.x, a - 1) * std::pow(p.y, b);
      if (b > 0) g[1] += c * b * std::pow(p.x, a) * std::pow(p.y, b - 1);
    }
  return g;
}

poly::Coeffs mollify_polynomial(std::span<const double> g, const Mollifier1D& m) {
  // (m * x^k)(x) = Σ_j C(k, j) (-1)^j m_j x^(k-j).
  const int n = static_cast<int>(g.size());
  poly::Coeffs f(n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int j = 0; k + j < n; ++j) {
      const double sign = j % 2 == 0 ? 1.0 : -1.0;
      f[k] += g[k + j] * poly::binomial(k + j, j) * sign * m.moment(j);
    }
  return f;
}

poly::Coeffs reproduction_coefficients(std::span<const double> target, const Mollifier1D& m) {
  const int n = static_cast<int>(target.size());
  std::vector<double> moments(n);
  for (int j = 0; j < n; ++j) moments[j] = m.moment(j);
  poly::Coeffs g(n, 0.0);
  for (int k = n - 1; k >= 0; --k) {
    double v = target[k];
    for (int j = 1; k + j < n; ++j) {
      const double sign = j % 2 == 0 ? 1.0 : -1.0;
      v -= g[k + j] * poly::binomial(k + j, j) * sign * moments[j];
    }
    g[k] = v;
  }
  return g;
}

Poly2 reproduction_coefficients(const Poly2& target, const MollifierTensor& m) {
  const int d = target.degree;
  Poly2 tmp(d), g(d);
  std::vector<double> col(d + 1);
  for (int b = 0; b <= d; ++b) {
    for (int a = 0; a <= d; ++a) col[a] = target.at(a, b);
    const poly::Coeffs r = reproduction_coefficients(col, m.factor);
    for (int a = 0; a <= d; ++a) tmp.at(a, b) = r[a];
  }
  for (int a = 0; a <= d; ++a) {
    for (int b = 0; b <= d; ++b) col[b] = tmp.at(a, b);
    const poly::Coeffs r = reproduction_coefficients(col, m.factor);
    for (int b = 0; b <= d; ++b) g.at(a, b) = r[b];
  }
  return g;
}

std::vector<double> cell_coefficients(const Poly2& g, const CellBasis& cb) {
  const int d = g.degree;
  const double half = 0.5 * cb.scale();
  Poly2 local(d);
  for (int a = 0; a <= d; ++a)
    for (int b = 0; b <= d; ++b) {
      const double c = g.at(a, b);
      if (c == 0.0) continue;
      const poly::Coeffs xa = poly::affine_power(cb.center().x, half, a);
      const poly::Coeffs yb = poly::affine_power(cb.center().y, half, b);
      for (std::size_t i = 0; i < xa.size(); ++i)
        for (std::size_t j = 0; j < yb.size(); ++j) local.at(i, j) += c * xa[i] * yb[j];
    }
  std::vector<double> out(cb.size(), 0.0);
  double scale = 0.0;
  for (double c : local.c) scale = std::max(scale, std::abs(c));
  for (int a = 0; a <= d; ++a)
    for (int b = 0; b <= d; ++b) {
      const double c = local.at(a, b);
      if (c == 0.0) continue;
      bool placed = false;
      int k = 0;
      for (const auto& [ea, eb] : cb.exponents()) {
        if (ea == a && eb == b) {
          out[k] = c;
          placed = true;
          break;
        }
        ++k;
      }
      if (!placed && std::abs(c) > 1e-12 * scale)
        throw InvalidArgument("polynomial degree exceeds the cell basis degree");
    }
  return out;
}

std::vector<double> cell_coefficients(std::span<const double> g, const CellBasis& cb) {
  const poly::Coeffs local = poly::compose_affine(g, cb.center().x, 0.5 * cb.scale());
  std::vector<double> out(cb.size(), 0.0);
  double scale = 0.0;
  for (double c : local) scale = std::max(scale, std::abs(c));
  for (std::size_t k = 0; k < local.size(); ++k) {
    if (static_cast<int>(k) < cb.size())
      out[k] = local[k];
    else if (std::abs(local[k]) > 1e-12 * scale)
      throw InvalidArgument("polynomial degree exceeds the cell basis degree");
  }
  return out;
}

} // namespace mollified
