#include "mollified/mollifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mollified/errors.hpp"
#include "mollified/quadrature.hpp"

namespace mollified {

namespace {

// Cox–de Boor recursion carried out on polynomial coefficients: returns the
// pieces of the single B-spline of `degree` on the uniform knots
// -1, -1 + 2/(degree+1), ..., 1.
std::vector<MollifierPiece> bspline_pieces(int degree) {
  const int spans = degree + 1;
  std::vector<double> knots(spans + 1);
  for (int j = 0; j <= spans; ++j) knots[j] = -1.0 + 2.0 * j / spans;

  std::vector<MollifierPiece> pieces;
  for (int s = 0; s < spans; ++s) {
    // basis[j] = B_{j,p} restricted to span s.
    std::vector<poly::Coeffs> basis(spans);
    for (int j = 0; j < spans; ++j) basis[j] = {j == s ? 1.0 : 0.0};
    for (int p = 1; p <= degree; ++p) {
      std::vector<poly::Coeffs> next(spans - p);
      for (int j = 0; j + p < spans; ++j) {
        const double dl = knots[j + p] - knots[j];
        const double dr = knots[j + p + 1] - knots[j + 1];
        const poly::Coeffs left{-knots[j] / dl, 1.0 / dl};
        const poly::Coeffs right{knots[j + p + 1] / dr, -1.0 / dr};
        poly::Coeffs a = poly::multiply(left, basis[j]);
        const poly::Coeffs b = poly::multiply(right, basis[j + 1]);
        a.resize(std::max(a.size(), b.size()), 0.0);
        for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
        next[j] = std::move(a);
      }
      basis = std::move(next);
    }
    // ∫ B = (knot span)/(degree+1) = 2/(degree+1); rescale to unit volume.
    poly::Coeffs c = basis[0];
    for (double& v : c) v *= 0.5 * (degree + 1);
    c.resize(degree + 1, 0.0);
    pieces.push_back({knots[s], knots[s + 1], std::move(c)});
  }
  return pieces;
}

} // namespace

Mollifier1D::Mollifier1D(MollifierKind kind, int degree, double support, std::vector<MollifierPiece> pieces)
    : kind_(kind), degree_(degree), support_(support), pieces_(std::move(pieces)) {}

Mollifier1D Mollifier1D::bspline(int degree, double support) {
  if (degree < 1 || degree > 8) throw InvalidArgument("bspline mollifier degree must be in [1, 8]");
  if (!(support > 0.0) || !std::isfinite(support)) throw InvalidArgument("mollifier support must be positive");
  return Mollifier1D(MollifierKind::bspline, degree, support, bspline_pieces(degree));
}

Mollifier1D Mollifier1D::quartic(double support) {
  if (!(support > 0.0) || !std::isfinite(support)) throw InvalidArgument("mollifier support must be positive");
  // With z = 2x/h_m: 15/16 (1 - 2 z^2 + z^4).
  const double c = 15.0 / 16.0;
  return Mollifier1D(MollifierKind::quartic, 4, support, {{-1.0, 1.0, {c, 0.0, -2.0 * c, 0.0, c}}});
}

double Mollifier1D::deriv(double x, int k, Side side) const {
  if (k < 0 || k > degree_) throw InvalidArgument("mollifier derivative order " + std::to_string(k) + " exceeds degree");
  const double z = 2.0 * x / support_;
  const MollifierPiece* piece = nullptr;
  for (const MollifierPiece& p : pieces_) {
    const bool inside = side == Side::right ? (z >= p.z0 && z < p.z1) : (z > p.z0 && z <= p.z1);
    if (inside) {
      piece = &p;
      break;
    }
  }
  if (piece == nullptr) return 0.0;
  poly::Coeffs c = piece->coeffs;
  for (int i = 0; i < k; ++i) c = poly::derivative(c);
  return std::pow(2.0 / support_, k + 1) * poly::eval(c, z);
}

double Mollifier1D::moment(int s) const {
  if (s < 0) throw InvalidArgument("moment order must be non-negative");
  if (s % 2 == 1) return 0.0;
  const LineRule rule = gauss_interval(gauss_points_for_degree(degree_ + s));
  double sum = 0.0;
  for (const MollifierPiece& p : pieces_) {
    const double mid = 0.5 * (p.z0 + p.z1), half = 0.5 * (p.z1 - p.z0);
    for (std::size_t i = 0; i < rule.points.size(); ++i) {
      const double z = mid + half * rule.points[i];
      sum += half * rule.weights[i] * poly::eval(p.coeffs, z) * std::pow(z, s);
    }
  }
  return std::pow(0.5 * support_, s) * sum;
}

std::vector<double> Mollifier1D::breakpoints() const {
  std::vector<double> b;
  b.reserve(pieces_.size() + 1);
  for (const MollifierPiece& p : pieces_) b.push_back(0.5 * support_ * p.z0);
  b.push_back(0.5 * support_ * pieces_.back().z1);
  return b;
}

double eval_tensor(const MollifierTensor& m, Point p) { return m.factor.eval(p.x) * m.factor.eval(p.y); }

std::array<double, 2> grad_tensor(const MollifierTensor& m, Point p) {
  const double mx = m.factor.eval(p.x), my = m.factor.eval(p.y);
  return {m.factor.deriv(p.x, 1) * my, mx * m.factor.deriv(p.y, 1)};
}

} // namespace mollified
