#pragma once

#include <array>
#include <vector>

#include "mollified/geometry.hpp"
#include "mollified/polynomial.hpp"

namespace mollified {

enum class MollifierKind { bspline, quartic };

// One polynomial piece of the unit-support shape g(z), z in [-1, 1].
struct MollifierPiece {
  double z0 = -1.0;
  double z1 = 1.0;
  poly::Coeffs coeffs; // in powers of z
};

// Normalized, symmetric, compactly supported kernel on (-h_m/2, h_m/2).
// Stored through its unit-support shape: m(x) = (2/h_m) g(2x/h_m), with
// ∫ g dz = 1 over [-1, 1].
class Mollifier1D {
public:
  enum class Side { left, right };

  // Uniform B-spline of the given degree on degree+1 equal knot spans.
  static Mollifier1D bspline(int degree, double support);
  // C1 quartic spline 15/(8 h_m) (1 - 8 (x/h_m)^2 + 16 (x/h_m)^4).
  static Mollifier1D quartic(double support);

  MollifierKind kind() const { return kind_; }
  // B-spline degree, or 4 for the quartic.
  int degree() const { return degree_; }
  double support() const { return support_; }
  double halfwidth() const { return 0.5 * support_; }
  // Highest continuous derivative order (C^k).
  int smoothness() const { return kind_ == MollifierKind::quartic ? 1 : degree_ - 1; }

  double eval(double x) const { return deriv(x, 0); }
  // k-th derivative; at breakpoints `side` selects the one-sided limit.
  // Throws InvalidArgument for k above the piece degree.
  double deriv(double x, int k, Side side = Side::right) const;
  // ∫ m(x) x^s dx.
  double moment(int s) const;
  // Abscissae where the piecewise representation changes, incl. ±h_m/2.
  std::vector<double> breakpoints() const;

  const std::vector<MollifierPiece>& shape_pieces() const { return pieces_; }

private:
  Mollifier1D(MollifierKind kind, int degree, double support, std::vector<MollifierPiece> pieces);

  MollifierKind kind_;
  int degree_;
  double support_;
  std::vector<MollifierPiece> pieces_;
};

// m(x) = Π_k m(x_k) in two dimensions; support is the square box of
// halfwidth h_m/2.
struct MollifierTensor {
  Mollifier1D factor;

  double support() const { return factor.support(); }
  double halfwidth() const { return factor.halfwidth(); }
  Box support_box(Point center) const { return Box{center, factor.halfwidth()}; }
};

double eval_tensor(const MollifierTensor& m, Point p);
std::array<double, 2> grad_tensor(const MollifierTensor& m, Point p);

} // namespace mollified
