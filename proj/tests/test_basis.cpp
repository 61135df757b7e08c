#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "mollified/basis.hpp"
#include "mollified/errors.hpp"

using namespace mollified;

namespace {

template <class F>
double simpson(F f, double a, double b, int n) {
  if (!(b > a)) return 0.0;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Independent 1D oracle: Simpson on each breakpoint-free piece.
double convolve_1d(const Mollifier1D& m, Interval cell, double x, const std::function<double(double)>& p) {
  std::vector<double> cuts{std::max(cell.lo, x - m.halfwidth()), std::min(cell.hi, x + m.halfwidth())};
  if (!(cuts[1] > cuts[0])) return 0.0;
  for (double b : m.breakpoints())
    if (x - b > cuts[0] && x - b < cuts[1]) cuts.push_back(x - b);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    s += simpson([&](double y) { return m.eval(x - y) * p(y); }, cuts[i], cuts[i + 1], 2000);
  return s;
}

struct Grid2D {
  std::vector<Point> seeds;
  VoronoiDiagram vd;
};

// Perturbed lattice over [-pad, 1 + pad]^2 with spacing 1/n.
Grid2D lattice(int n, double pad, double amp, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  Grid2D g;
  const int layers = static_cast<int>(std::ceil(pad * n));
  for (int i = -layers; i < n + layers; ++i)
    for (int j = -layers; j < n + layers; ++j) g.seeds.push_back({(i + 0.5) / n + u(rng), (j + 0.5) / n + u(rng)});
  const double lo = -static_cast<double>(layers) / n, hi = 1.0 + static_cast<double>(layers) / n;
  g.vd = voronoi(g.seeds, BoundingBox{{lo, lo}, {hi, hi}});
  return g;
}

} // namespace

TEST_CASE("monomials") {
  const CellBasis cb({0.3, -0.2}, 0.5, 1);
  const BasisValue at_c = monomials(cb, cb.center());
  CHECK(at_c.values == std::vector<double>{1.0, 0.0, 0.0});
  const BasisValue v = monomials(cb, {0.3 + 0.25, -0.2 + 0.5});
  CHECK(v.values[0] == doctest::Approx(1.0));
  CHECK(v.values[1] == doctest::Approx(1.0));
  CHECK(v.values[2] == doctest::Approx(2.0));

  const CellBasis c3({0.1, 0.2}, 0.7, 3);
  CHECK(c3.size() == 10);
  CHECK(CellBasis({0, 0}, 1.0, 3, 1).size() == 4);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double step = 1e-6;
  for (int k = 0; k < 50; ++k) {
    const Point p{u(rng), u(rng)};
    const BasisValue b = monomials(c3, p);
    const BasisValue bx1 = monomials(c3, {p.x + step, p.y}), bx0 = monomials(c3, {p.x - step, p.y});
    const BasisValue by1 = monomials(c3, {p.x, p.y + step}), by0 = monomials(c3, {p.x, p.y - step});
    for (int i = 0; i < c3.size(); ++i) {
      const double fx = (bx1.values[i] - bx0.values[i]) / (2 * step);
      const double fy = (by1.values[i] - by0.values[i]) / (2 * step);
      CHECK(std::abs(b.gradients[i][0] - fx) <= 1e-8 * std::max(1.0, std::abs(fx)) * 100);
      CHECK(std::abs(b.gradients[i][1] - fy) <= 1e-8 * std::max(1.0, std::abs(fy)) * 100);
    }
  }
}

TEST_CASE("eval_1d") {
  const Mollifier1D hat = Mollifier1D::bspline(1, 0.2);
  const Interval cell{0.0, 1.0};
  const CellBasis c0({0.5, 0}, 1.0, 0, 1);
  CHECK(eval_1d(c0, cell, hat, 0.5).values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eval_1d(c0, cell, hat, 0.5).gradients[0][0] == doctest::Approx(0.0));
  const BasisValue far = eval_1d(c0, cell, hat, 1.2);
  CHECK(far.values[0] == 0.0);
  CHECK(far.gradients[0][0] == 0.0);

  // q = 3 with the hat: values against the Simpson oracle and C1 across
  // the breakpoints x = lo ± h_m/2, lo, hi ± h_m/2, hi.
  const Interval c{0.2, 0.5};
  const CellBasis c3({0.35, 0}, 0.25, 3, 1);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.05, 0.65);
  for (int k = 0; k < 40; ++k) {
    const double x = u(rng);
    const BasisValue b = eval_1d(c3, c, hat, x);
    for (int i = 0; i < 4; ++i) {
      const double ref = convolve_1d(hat, c, x, [&](double y) { return std::pow(2 * (y - 0.35) / 0.25, i); });
      CHECK(std::abs(b.values[i] - ref) <= 1e-11 * std::max(1.0, std::abs(ref)));
    }
  }
  const double step = 1e-7;
  for (double bp : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}) {
    const BasisValue v0 = eval_1d(c3, c, hat, bp);
    const BasisValue l = eval_1d(c3, c, hat, bp - step), r = eval_1d(c3, c, hat, bp + step);
    const BasisValue l2 = eval_1d(c3, c, hat, bp - 2 * step), r2 = eval_1d(c3, c, hat, bp + 2 * step);
    for (int i = 0; i < 4; ++i) {
      const double dl = (3 * v0.values[i] - 4 * l.values[i] + l2.values[i]) / (2 * step);
      const double dr = (-3 * v0.values[i] + 4 * r.values[i] - r2.values[i]) / (2 * step);
      const double scale = std::max(1.0, std::abs(dl));
      CHECK(std::abs(dl - dr) <= 1e-7 * scale * 100);
      // Analytic derivative agrees with the one-sided slopes.
      CHECK(std::abs(v0.gradients[i][0] - dl) <= 1e-5 * scale);
    }
  }
}

TEST_CASE("eval_2d basic properties") {
  const MollifierTensor m{Mollifier1D::quartic(0.2)};
  const ConvexPolygon cell = ConvexPolygon::rectangle({0, 0}, {1, 1});
  const CellBasis c0({0.5, 0.5}, 1.0, 0);
  const BasisValue inside = eval_2d(c0, cell, m, {0.4, 0.6});
  CHECK(inside.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(inside.gradients[0][0]) <= 1e-13);
  CHECK(std::abs(inside.gradients[0][1]) <= 1e-13);

  const SupportRegion sr = support(cell, m);
  CHECK(sr.polygon.area() == doctest::Approx(1.2 * 1.2));
  const BasisValue out = eval_2d(c0, cell, m, {1.15, 0.5});
  CHECK(out.values[0] == 0.0);
  CHECK(out.gradients[0][0] == 0.0);
  const BasisValue edge = eval_2d(c0, cell, m, {1.1 - 1e-3, 0.5});
  CHECK(edge.values[0] > 0.0);
}

TEST_CASE("divergence and triangulation paths agree") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Grid2D g = lattice(5, 0.0, 0.06, 3);
  for (const MollifierTensor& m :
       {MollifierTensor{Mollifier1D::quartic(0.4)}, MollifierTensor{Mollifier1D::bspline(2, 0.4)}}) {
    for (int k = 0; k < 100; ++k) {
      const std::size_t ci = static_cast<std::size_t>(u(rng) * g.vd.cells.size()) % g.vd.cells.size();
      const ConvexPolygon& cell = g.vd.cells[ci];
      const Point c = cell.centroid();
      const Point p{c.x + 0.5 * (u(rng) - 0.5), c.y + 0.5 * (u(rng) - 0.5)};
      const CellBasis cb(g.seeds[ci], 0.2, 2);
      const BasisValue a = eval_2d(cb, cell, m, p, IntegrationPath::divergence);
      const BasisValue b = eval_2d(cb, cell, m, p, IntegrationPath::triangulation);
      double scale = 0.0, gscale = 0.0;
      for (int i = 0; i < cb.size(); ++i) {
        scale = std::max(scale, std::abs(b.values[i]));
        gscale = std::max({gscale, std::abs(b.gradients[i][0]), std::abs(b.gradients[i][1])});
      }
      for (int i = 0; i < cb.size(); ++i) {
        CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-12 * std::max(scale, 1e-300));
        CHECK(std::abs(a.gradients[i][0] - b.gradients[i][0]) <= 1e-12 * std::max(gscale, 1e-300));
        CHECK(std::abs(a.gradients[i][1] - b.gradients[i][1]) <= 1e-12 * std::max(gscale, 1e-300));
      }
    }
  }
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Grid2D g = lattice(4, 0.0, 0.05, 9);
  const MollifierTensor m{Mollifier1D::quartic(0.5)};
  const double step = 1e-6;
  int tested = 0;
  while (tested < 100) {
    const std::size_t ci = static_cast<std::size_t>(u(rng) * g.vd.cells.size()) % g.vd.cells.size();
    const ConvexPolygon& cell = g.vd.cells[ci];
    const CellBasis cb(g.seeds[ci], 0.25, 2);
    const Point p{u(rng) * 1.2 - 0.1, u(rng) * 1.2 - 0.1};
    const BasisValue b = eval_2d(cb, cell, m, p);
    if (b.values[0] < 1e-3) continue;
    ++tested;
    const BasisValue x1 = eval_2d(cb, cell, m, {p.x + step, p.y}), x0 = eval_2d(cb, cell, m, {p.x - step, p.y});
    const BasisValue y1 = eval_2d(cb, cell, m, {p.x, p.y + step}), y0 = eval_2d(cb, cell, m, {p.x, p.y - step});
    double gscale = 0.0;
    for (int i = 0; i < cb.size(); ++i)
      gscale = std::max({gscale, std::abs(b.gradients[i][0]), std::abs(b.gradients[i][1])});
    for (int i = 0; i < cb.size(); ++i) {
      const double fx = (x1.values[i] - x0.values[i]) / (2 * step);
      const double fy = (y1.values[i] - y0.values[i]) / (2 * step);
      CHECK(std::abs(b.gradients[i][0] - fx) <= 1e-6 * gscale);
      CHECK(std::abs(b.gradients[i][1] - fy) <= 1e-6 * gscale);
    }
  }
}

TEST_CASE("partition of unity and polynomial reproduction") {
  const int n = 5;
  const double h = 1.0 / n;
  const Grid2D g = lattice(n, 0.4, 0.15 * h, 21);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const MollifierTensor& m :
       {MollifierTensor{Mollifier1D::quartic(2 * h)}, MollifierTensor{Mollifier1D::bspline(1, 2 * h)}}) {
    for (int deg = 0; deg <= 2; ++deg) {
      const BasisEvaluator ev(m, deg, h);
      // Random target polynomial of total degree deg.
      Poly2 target(deg);
      for (int a = 0; a <= deg; ++a)
        for (int b = 0; a + b <= deg; ++b) target.at(a, b) = 2 * u(rng) - 1;
      const Poly2 gpoly = reproduction_coefficients(target, m);
      std::vector<std::vector<double>> coeffs;
      for (std::size_t i = 0; i < g.seeds.size(); ++i)
        coeffs.push_back(cell_coefficients(gpoly, CellBasis(g.seeds[i], h, deg)));
      for (int k = 0; k < 200; ++k) {
        const Point p{u(rng), u(rng)};
        double sum = 0.0, unity = 0.0, gx = 0.0, gy = 0.0;
        BasisValue bv;
        for (std::size_t i = 0; i < g.seeds.size(); ++i) {
          if (!ev.evaluate(g.vd.cells[i], g.seeds[i], p, bv)) continue;
          unity += bv.values[0];
          for (int j = 0; j < ev.size(); ++j) {
            sum += coeffs[i][j] * bv.values[j];
            gx += coeffs[i][j] * bv.gradients[j][0];
            gy += coeffs[i][j] * bv.gradients[j][1];
          }
        }
        CHECK(std::abs(unity - 1.0) <= 1e-10);
        CHECK(std::abs(sum - target(p)) <= 1e-10);
        const auto tg = target.gradient(p);
        CHECK(std::abs(gx - tg[0]) <= 1e-9);
        CHECK(std::abs(gy - tg[1]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("quartic mollified basis is C2 across cell boundaries and breakpoint lines") {
  const int n = 4;
  const double h = 1.0 / n;
  const Grid2D g = lattice(n, 0.0, 0.1 * h, 4);
  const MollifierTensor m{Mollifier1D::quartic(2 * h)};
  const BasisEvaluator ev(m, 2, h);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double step = 1e-4 * h;
  int probes = 0;
  while (probes < 1000) {
    const std::size_t ci = static_cast<std::size_t>(u(rng) * g.seeds.size()) % g.seeds.size();
    const ConvexPolygon& cell = g.vd.cells[ci];
    // Crossing points: a cell-boundary point shifted by a box corner offset
    // puts a face of the mollifier box exactly on a cell edge.
    const std::size_t e = static_cast<std::size_t>(u(rng) * cell.size()) % cell.size();
    const Point a = cell[e], b = cell[(e + 1) % cell.size()];
    Point x = a + u(rng) * (b - a);
    if (u(rng) < 0.5) x = x + Point{(u(rng) < 0.5 ? -1 : 1) * h, 0.0};
    const double ang = 2 * 3.141592653589793 * u(rng);
    const Point d{std::cos(ang), std::sin(ang)};
    const auto f = [&](double s, BasisValue& bv) { ev.evaluate(cell, g.seeds[ci], x + s * d, bv); };
    BasisValue v0, l1, l2, l3, r1, r2, r3;
    f(0, v0);
    f(-step, l1), f(-2 * step, l2), f(-3 * step, l3);
    f(step, r1), f(2 * step, r2), f(3 * step, r3);
    ++probes;
    const double vs = std::abs(v0.values[0]) + 1.0;
    for (int i = 0; i < ev.size(); ++i) {
      // One-sided second-order differences of the directional derivative
      // (from analytic gradients) and of the curvature.
      const auto dd = [&](const BasisValue& bv) { return bv.gradients[i][0] * d.x + bv.gradients[i][1] * d.y; };
      const double gl = (3 * dd(v0) - 4 * dd(l1) + dd(l2)) / (2 * step);
      const double gr = (-3 * dd(v0) + 4 * dd(r1) - dd(r2)) / (2 * step);
      const double dl = (3 * v0.values[i] - 4 * l1.values[i] + l2.values[i]) / (2 * step);
      const double dr = (-3 * v0.values[i] + 4 * r1.values[i] - r2.values[i]) / (2 * step);
      const double scale1 = vs / h, scale2 = vs / (h * h);
      CHECK(std::abs(dl - dr) <= 1e-6 * scale1);
      CHECK(std::abs(gl - gr) <= 1e-6 * scale2);
      (void)l3, (void)r3;
    }
  }
}

TEST_CASE("reproduction coefficients") {
  const Mollifier1D m = Mollifier1D::bspline(2, 0.6);
  const double m2 = m.moment(2);
  const std::vector<double> lin{0.3, -1.2};
  CHECK(reproduction_coefficients(lin, m) == lin);
  const auto sq = reproduction_coefficients(std::vector<double>{0, 0, 1}, m);
  CHECK(sq[0] == doctest::Approx(-m2));
  CHECK(sq[1] == doctest::Approx(0.0));
  CHECK(sq[2] == doctest::Approx(1.0));
  const auto cube = reproduction_coefficients(std::vector<double>{0, 0, 0, 1}, m);
  CHECK(cube[1] == doctest::Approx(-3 * m2));
  // Numeric mollification of g on a fine grid reproduces x^3.
  for (double x : {-0.7, 0.1, 0.45, 1.3}) {
    const double w = m.halfwidth();
    double v = 0.0;
    const auto bps = m.breakpoints();
    for (std::size_t i = 0; i + 1 < bps.size(); ++i)
      v += simpson([&](double y) { return m.eval(y) * poly::eval(cube, x - y); }, bps[i], bps[i + 1], 2000);
    (void)w;
    CHECK(std::abs(v - x * x * x) <= 1e-10);
  }
  const auto back = mollify_polynomial(reproduction_coefficients(std::vector<double>{1, 2, 3, 4}, m), m);
  for (int k = 0; k < 4; ++k) CHECK(back[k] == doctest::Approx(k + 1.0));

  const CellBasis cb({0.3, 0}, 0.2, 1, 1);
  CHECK_THROWS_AS(cell_coefficients(std::vector<double>{0, 0, 1}, cb), InvalidArgument);
}
