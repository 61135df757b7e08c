#include <doctest.h>

#include <cmath>
#include <random>

#include "mollified/errors.hpp"
#include "mollified/mollifier.hpp"

using namespace mollified;

namespace {

// Composite Simpson on [a, b]; independent of the Gauss machinery.
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

std::vector<Mollifier1D> all_mollifiers(double hm) {
  return {Mollifier1D::quartic(hm), Mollifier1D::bspline(1, hm), Mollifier1D::bspline(2, hm),
          Mollifier1D::bspline(3, hm)};
}

} // namespace

TEST_CASE("mollifier point values") {
  const Mollifier1D q = Mollifier1D::quartic(2.0);
  CHECK(q.eval(0.0) == doctest::Approx(0.9375).epsilon(1e-15));
  CHECK(q.eval(1.0) == 0.0);
  CHECK(q.eval(-1.0) == 0.0);
  CHECK(q.eval(1.5) == 0.0);
  CHECK(q.deriv(1.0, 1, Mollifier1D::Side::left) == doctest::Approx(0.0));
  CHECK(q.deriv(-1.0, 1) == doctest::Approx(0.0));

  // Unit-area hat on (-1, 1) peaks at 1.
  const Mollifier1D hat = Mollifier1D::bspline(1, 2.0);
  CHECK(hat.eval(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(simpson([&](double x) { return hat.eval(x); }, -1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-10));

  CHECK_THROWS_AS(Mollifier1D::bspline(0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Mollifier1D::quartic(-1.0), InvalidArgument);
  CHECK_THROWS_AS(hat.deriv(0.2, 2), InvalidArgument);
}

TEST_CASE("mollifier normalization, symmetry and moments") {
  std::mt19937_64 rng(4);
  for (double hm : {0.3, 1.0, 2.0}) {
    std::uniform_real_distribution<double> u(-0.6 * hm, 0.6 * hm);
    for (const Mollifier1D& m : all_mollifiers(hm)) {
      CHECK(m.moment(0) == doctest::Approx(1.0).epsilon(1e-12));
      const double w = m.halfwidth();
      CHECK(simpson([&](double x) { return m.eval(x); }, -w, w) == doctest::Approx(1.0).epsilon(1e-9));
      for (int s = 1; s <= 7; s += 2) CHECK(std::abs(m.moment(s)) <= 1e-13);
      const double m2 = simpson([&](double x) { return m.eval(x) * x * x; }, -w, w);
      CHECK(m.moment(2) == doctest::Approx(m2).epsilon(1e-9));
      for (int k = 0; k < 1000; ++k) {
        const double x = u(rng);
        CHECK(m.eval(x) == doctest::Approx(m.eval(-x)).epsilon(1e-12));
        CHECK(m.eval(x) >= 0.0);
        if (std::abs(x) >= w) CHECK(m.eval(x) == 0.0);
      }
      // At a kink (the hat) only the symmetric average vanishes.
      const double d0 = 0.5 * (m.deriv(0.0, 1, Mollifier1D::Side::left) + m.deriv(0.0, 1, Mollifier1D::Side::right));
      CHECK(std::abs(d0) <= 1e-12 * std::pow(2.0 / hm, 2));
    }
    CHECK(Mollifier1D::bspline(1, hm).moment(2) == doctest::Approx(hm * hm / 24.0).epsilon(1e-13));
  }
}

TEST_CASE("mollifier breakpoints") {
  const Mollifier1D q = Mollifier1D::quartic(2.0);
  CHECK(q.breakpoints() == std::vector<double>{-1.0, 1.0});
  const auto b1 = Mollifier1D::bspline(1, 2.0).breakpoints();
  REQUIRE(b1.size() == 3);
  CHECK(b1[1] == doctest::Approx(0.0));
  const auto b3 = Mollifier1D::bspline(3, 2.0).breakpoints();
  REQUIRE(b3.size() == 5);
  for (std::size_t i = 0; i + 1 < b3.size(); ++i) CHECK(b3[i + 1] - b3[i] == doctest::Approx(0.5));
}

TEST_CASE("mollifier derivative matches finite differences") {
  std::mt19937_64 rng(8);
  for (const Mollifier1D& m : all_mollifiers(1.3)) {
    const double w = m.halfwidth();
    std::uniform_real_distribution<double> u(-w, w);
    const double step = 1e-6 * m.support();
    const auto bps = m.breakpoints();
    for (int k = 0; k < 100; ++k) {
      const double x = u(rng);
      bool near = false;
      for (double b : bps) near = near || std::abs(x - b) < 10 * step;
      if (near) continue;
      const double fd = (m.eval(x + step) - m.eval(x - step)) / (2 * step);
      const double scale = m.deriv(0.0, 0) / w;
      CHECK(std::abs(m.deriv(x, 1) - fd) <= 1e-6 * scale);
    }
  }
}

TEST_CASE("mollifier smoothness across breakpoints") {
  for (const Mollifier1D& m : all_mollifiers(1.7)) {
    const int k_max = m.smoothness();
    for (double b : m.breakpoints())
      for (int k = 0; k <= k_max; ++k) {
        const double l = m.deriv(b, k, Mollifier1D::Side::left);
        const double r = m.deriv(b, k, Mollifier1D::Side::right);
        const double scale = std::abs(m.deriv(0.0, 0)) * std::pow(2.0 / m.support(), k) + 1e-300;
        CHECK(std::abs(l - r) <= 1e-9 * scale);
      }
  }
  // The hat is only C0: its first derivative jumps at 0.
  const Mollifier1D hat = Mollifier1D::bspline(1, 2.0);
  CHECK(hat.deriv(0.0, 1, Mollifier1D::Side::left) == doctest::Approx(1.0));
  CHECK(hat.deriv(0.0, 1, Mollifier1D::Side::right) == doctest::Approx(-1.0));
}

TEST_CASE("tensor mollifier") {
  const MollifierTensor m{Mollifier1D::quartic(2.0)};
  CHECK(eval_tensor(m, {0, 0}) == doctest::Approx(0.87890625).epsilon(1e-15));
  CHECK(eval_tensor(m, {1.2, 0}) == 0.0);
  const auto g0 = grad_tensor(m, {3, 3});
  CHECK(g0[0] == 0.0);
  CHECK(g0[1] == 0.0);

  // Unit volume by a 2D Simpson product.
  const double vol = simpson(
      [&](double x) { return simpson([&](double y) { return eval_tensor(m, {x, y}); }, -1.0, 1.0, 2000); }, -1.0,
      1.0, 2000);
  CHECK(vol == doctest::Approx(1.0).epsilon(1e-10));

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  const double step = 1e-6;
  for (int k = 0; k < 100; ++k) {
    const Point p{u(rng), u(rng)};
    const auto g = grad_tensor(m, p);
    const double fx = (eval_tensor(m, {p.x + step, p.y}) - eval_tensor(m, {p.x - step, p.y})) / (2 * step);
    const double fy = (eval_tensor(m, {p.x, p.y + step}) - eval_tensor(m, {p.x, p.y - step})) / (2 * step);
    CHECK(std::abs(g[0] - fx) <= 1e-6 * std::max(1.0, std::abs(fx)));
    CHECK(std::abs(g[1] - fy) <= 1e-6 * std::max(1.0, std::abs(fy)));
  }
}
