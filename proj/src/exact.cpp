#include "mollified/exact.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "mollified/errors.hpp"

namespace mollified {

using std::numbers::pi;

std::array<std::array<double, 3>, 3> plane_stress(const Material& mat) {
  const double c = mat.E / (1.0 - mat.nu * mat.nu);
  return {{{c, c * mat.nu, 0.0}, {c * mat.nu, c, 0.0}, {0.0, 0.0, c * 0.5 * (1.0 - mat.nu)}}};
}

namespace {

// Displacement for remote tension along x; T is double or complex so the
// gradient can be taken by complex step.
template <class T>
std::array<T, 2> kirsch_x(const PlateHole& p, T x, T y) {
  const double a = p.radius, nu = p.material.nu;
  const double mu = p.material.E / (2.0 * (1.0 + nu));
  const double kappa = (3.0 - nu) / (1.0 + nu);
  const T r = std::sqrt(x * x + y * y);
  const T c = x / r, s = y / r;
  const T c3 = 4.0 * c * c * c - 3.0 * c, s3 = 3.0 * s - 4.0 * s * s * s;
  const T ar = a / r, ar3 = ar * ar * ar;
  const double f = p.traction * a / (8.0 * mu);
  const T ux = f * ((r / a) * (kappa + 1.0) * c + 2.0 * ar * ((1.0 + kappa) * c + c3) - 2.0 * ar3 * c3);
  const T uy = f * ((r / a) * (kappa - 3.0) * s + 2.0 * ar * ((1.0 - kappa) * s + s3) - 2.0 * ar3 * s3);
  return {ux, uy};
}

// Rotated by a quarter turn so the tension is vertical.
template <class T>
std::array<T, 2> kirsch_y(const PlateHole& p, T x, T y) {
  const auto u = kirsch_x(p, y, -x);
  return {-u[1], u[0]};
}

FieldValue plate_field(const PlateHole& p, Point x) {
  using C = std::complex<double>;
  const double step = 1e-30;
  FieldValue out;
  const auto u = kirsch_y<double>(p, x.x, x.y);
  const auto dx = kirsch_y<C>(p, C(x.x, step), C(x.y, 0.0));
  const auto dy = kirsch_y<C>(p, C(x.x, 0.0), C(x.y, step));
  for (int c = 0; c < 2; ++c) {
    out.u[c] = u[c];
    out.grad[c] = {dx[c].imag() / step, dy[c].imag() / step};
  }
  return out;
}

} // namespace

std::array<double, 3> plate_hole_stress(const PlateHole& p, Point x) {
  // Cartesian Kirsch stresses for tension along x evaluated at the rotated
  // point, then rotated back.
  const double X = x.y, Y = -x.x;
  const double r2 = X * X + Y * Y, th = std::atan2(Y, X);
  const double a2 = p.radius * p.radius / r2, a4 = a2 * a2, s = p.traction;
  const double sxx = s * (1.0 - a2 * (1.5 * std::cos(2 * th) + std::cos(4 * th)) + 1.5 * a4 * std::cos(4 * th));
  const double syy = s * (-a2 * (0.5 * std::cos(2 * th) - std::cos(4 * th)) - 1.5 * a4 * std::cos(4 * th));
  const double sxy = s * (-a2 * (0.5 * std::sin(2 * th) + std::sin(4 * th)) + 1.5 * a4 * std::sin(4 * th));
  // σ = Q σ' Qᵀ with Q a quarter turn.
  return {syy, sxx, -sxy};
}

ExactSolution plate_hole_solution(const PlateHole& p) {
  ExactSolution e;
  e.name = "plate_hole";
  e.components = 2;
  e.field = [p](Point x) { return plate_field(p, x); };
  e.source = [](Point) { return std::array<double, 2>{0.0, 0.0}; };
  return e;
}

ExactSolution exact_solution(const std::string& name) {
  ExactSolution e;
  e.name = name;
  if (name == "sin2d") {
    e.field = [](Point p) {
      FieldValue f;
      f.u[0] = std::sin(pi * p.x) * std::sin(pi * p.y);
      f.grad[0] = {pi * std::cos(pi * p.x) * std::sin(pi * p.y), pi * std::sin(pi * p.x) * std::cos(pi * p.y)};
      return f;
    };
    e.source = [](Point p) { return std::array<double, 2>{2.0 * pi * pi * std::sin(pi * p.x) * std::sin(pi * p.y), 0.0}; };
  } else if (name == "patch_linear") {
    e.field = [](Point p) {
      FieldValue f;
      f.u[0] = p.x + 2.0 * p.y;
      f.grad[0] = {1.0, 2.0};
      return f;
    };
    e.source = [](Point) { return std::array<double, 2>{0.0, 0.0}; };
  } else if (name == "patch_quadratic") {
    // 1 + x + 2y + x² + 3xy + 2y²
    e.field = [](Point p) {
      FieldValue f;
      f.u[0] = 1.0 + p.x + 2.0 * p.y + p.x * p.x + 3.0 * p.x * p.y + 2.0 * p.y * p.y;
      f.grad[0] = {1.0 + 2.0 * p.x + 3.0 * p.y, 2.0 + 3.0 * p.x + 4.0 * p.y};
      return f;
    };
    e.source = [](Point) { return std::array<double, 2>{-6.0, 0.0}; };
  } else if (name == "plate_hole") {
    return plate_hole_solution({});
  } else {
    throw InvalidArgument("unknown exact solution '" + name + "'");
  }
  return e;
}

Exact1D exact_solution_1d(const std::string& name) {
  if (name != "sin1d") throw InvalidArgument("unknown 1D exact solution '" + name + "'");
  return {name, [](double x) { return std::sin(3 * pi * x); }, [](double x) { return 3 * pi * std::cos(3 * pi * x); },
          [](double x) { return 9 * pi * pi * std::sin(3 * pi * x); }};
}

} // namespace mollified
