#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mollified::poly {

// Dense univariate polynomials, coefficients in ascending powers.
using Coeffs = std::vector<double>;

inline double eval(std::span<const double> c, double x) {
  double r = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
  return r;
}

inline Coeffs multiply(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  Coeffs r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

inline Coeffs derivative(std::span<const double> c) {
  if (c.size() <= 1) return {0.0};
  Coeffs r(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) r[i - 1] = static_cast<double>(i) * c[i];
  return r;
}

// Coefficients of q(t) = p(offset + scale * t).
inline Coeffs compose_affine(std::span<const double> p, double offset, double scale) {
  Coeffs r(p.size(), 0.0);
  Coeffs pw{1.0}; // (offset + scale t)^k
  const Coeffs lin{offset, scale};
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t i = 0; i < pw.size(); ++i) r[i] += p[k] * pw[i];
    pw = multiply(pw, lin);
  }
  return r;
}

// Coefficients of (offset + scale * t)^n.
inline Coeffs affine_power(double offset, double scale, int n) {
  Coeffs r{1.0};
  const Coeffs lin{offset, scale};
  for (int k = 0; k < n; ++k) r = multiply(r, lin);
  return r;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

} // namespace mollified::poly
