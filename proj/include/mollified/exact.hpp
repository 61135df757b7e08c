#pragma once

#include <array>
#include <functional>
#include <string>

#include "mollified/geometry.hpp"

namespace mollified {

struct Material {
  double E = 1.0;
  double nu = 0.0;
};

// Plane-stress constitutive matrix in Voigt order (xx, yy, xy) with
// engineering shear strain.
std::array<std::array<double, 3>, 3> plane_stress(const Material& mat);

// Value and gradient of a (up to) two-component field; grad[c][k] = ∂u_c/∂x_k.
struct FieldValue {
  std::array<double, 2> u{};
  std::array<std::array<double, 2>, 2> grad{};
};

struct ExactSolution {
  std::string name;
  int components = 1;
  std::function<FieldValue(Point)> field;
  // Poisson: s = -Δu in component 0. Elasticity: body force.
  std::function<std::array<double, 2>(Point)> source;
};

// sin2d, patch_linear, patch_quadratic (Poisson) and plate_hole (plane
// stress, vertical remote tension). Throws InvalidArgument otherwise.
ExactSolution exact_solution(const std::string& name);

struct PlateHole {
  double radius = 0.25;
  double traction = 1e6;
  Material material{70e6, 0.3};
};
ExactSolution plate_hole_solution(const PlateHole& p);
// Stress (xx, yy, xy) of the plate problem in closed form.
std::array<double, 3> plate_hole_stress(const PlateHole& p, Point x);

struct Exact1D {
  std::string name;
  std::function<double(double)> u, du, source;
};
// sin1d: u = sin(3πx).
Exact1D exact_solution_1d(const std::string& name);

} // namespace mollified
