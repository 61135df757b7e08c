#pragma once

#include <array>
#include <span>
#include <vector>

#include "mollified/geometry.hpp"
#include "mollified/mollifier.hpp"
#include "mollified/polynomial.hpp"

namespace mollified {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
};

// Scaled and shifted monomials ξ^a η^b, a + b <= degree, with
// ξ = 2 (x - c) / h. In 1D only the ξ powers are used.
class CellBasis {
public:
  CellBasis(Point center, double scale, int degree, int dim = 2);

  Point center() const { return center_; }
  double scale() const { return scale_; }
  int degree() const { return degree_; }
  int dim() const { return dim_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  // Ordered by total degree, then by decreasing power of ξ:
  // 1, ξ, η, ξ², ξη, η², ...
  std::span<const std::array<int, 2>> exponents() const { return exponents_; }

private:
  Point center_;
  double scale_;
  int degree_;
  int dim_;
  std::vector<std::array<int, 2>> exponents_;
};

inline int basis_size(int degree, int dim) { return dim == 1 ? degree + 1 : (degree + 1) * (degree + 2) / 2; }

struct BasisValue {
  std::vector<double> values;
  std::vector<std::array<double, 2>> gradients;

  void reset(int n) {
    values.assign(n, 0.0);
    gradients.assign(n, {0.0, 0.0});
  }
};

// Plain (unmollified) scaled monomials and their gradients.
BasisValue monomials(const CellBasis& cb, Point p);

// Univariate mollified basis, evaluated by piecewise Gauss quadrature that
// is exact for the polynomial integrand.
BasisValue eval_1d(const CellBasis& cb, Interval cell, const Mollifier1D& m, double x);

enum class IntegrationPath { divergence, triangulation };

// Multivariate mollified basis N(p) = ∫_cell m(p - y) p_i(y) dy via the
// cell ∩ mollifier-box intersection.
BasisValue eval_2d(const CellBasis& cb, const ConvexPolygon& cell, const MollifierTensor& m, Point p,
                   IntegrationPath path = IntegrationPath::divergence);

// Reusable evaluator: precomputes the mollifier pieces once. Thread-safe
// for concurrent const use.
class BasisEvaluator {
public:
  BasisEvaluator(const MollifierTensor& m, int degree, double scale);

  int size() const { return n_; }
  int degree() const { return degree_; }
  double scale() const { return scale_; }
  const MollifierTensor& mollifier() const { return m_; }

  // Returns false (and leaves `out` zeroed) when the mollifier box at p does
  // not overlap the cell with positive area.
  bool evaluate(const ConvexPolygon& cell, Point center, Point p, BasisValue& out,
                IntegrationPath path = IntegrationPath::divergence) const;

private:
  struct PieceT {
    double t0, t1;             // interval in t = (y - p) / w
    poly::Coeffs value, deriv; // (1/w) g(-t), ∂/∂p of the same
  };
  MollifierTensor m_;
  int degree_;
  double scale_;
  int n_;
  std::vector<std::array<int, 2>> exponents_;
  std::vector<PieceT> pieces_;
};

// Moments μ[a][b] = ∫_ω t_x^a t_y^b for a <= max_a, b <= max_b, row-major
// (max_b + 1) stride.
std::vector<double> polygon_moments(const ConvexPolygon& omega, int max_a, int max_b, IntegrationPath path);

struct SupportRegion {
  ConvexPolygon polygon;
};

SupportRegion support(const ConvexPolygon& cell, const MollifierTensor& m);

// Bivariate polynomial Σ c[a][b] x^a y^b, dense (degree+1)^2 storage.
struct Poly2 {
  int degree = 0;
  std::vector<double> c;

  explicit Poly2(int deg = 0) : degree(deg), c((deg + 1) * (deg + 1), 0.0) {}
  double& at(int a, int b) { return c[a * (degree + 1) + b]; }
  double at(int a, int b) const { return c[a * (degree + 1) + b]; }
  double operator()(Point p) const;
  std::array<double, 2> gradient(Point p) const;
};

// Returns g with m * g = target (univariate, coefficients ascending).
poly::Coeffs reproduction_coefficients(std::span<const double> target, const Mollifier1D& m);
// Tensor-product mollifier version.
Poly2 reproduction_coefficients(const Poly2& target, const MollifierTensor& m);
// Convolution m * g of a polynomial (the forward map).
poly::Coeffs mollify_polynomial(std::span<const double> g, const Mollifier1D& m);

// Coefficients of a global polynomial in a cell's scaled monomial basis.
std::vector<double> cell_coefficients(const Poly2& g, const CellBasis& cb);
std::vector<double> cell_coefficients(std::span<const double> g, const CellBasis& cb);

} // namespace mollified
