#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mollified/basis.hpp"
#include "mollified/exact.hpp"
#include "mollified/fem.hpp"
#include "mollified/mollifier.hpp"

namespace mollified {

struct Mesh1DOptions {
  int degree = 1;
  MollifierKind kind = MollifierKind::bspline;
  int mollifier_degree = 1;
  // h_m = 2 chi max(cell width)
  double chi = 1.0;
};

// Cells of (lo, hi) padded with one ghost cell of width h_m/2 on each side.
// cells.front() and cells.back() are the ghosts.
struct Mesh1D {
  std::vector<Interval> cells;
  double lo = 0.0, hi = 1.0;
  Mollifier1D mollifier = Mollifier1D::bspline(1, 1.0);
  int degree = 1;
  double scale = 1.0; // monomial scale, mean domain cell width
};

// Domain (0, Σ widths).
Mesh1D build_mesh_1d(const std::vector<double>& widths, const Mesh1DOptions& opts);
// Splits every cell in two.
std::vector<double> bisect(const std::vector<double>& widths);
// 0.15, 0.2, 0.15, 0.15, 0.2, 0.15 from the left.
std::vector<double> default_cells_1d();

// Value and derivative of the discrete field at x.
std::array<double, 2> evaluate_1d(const Mesh1D& mesh, const Eigen::VectorXd& coeffs, double x);

struct Solve1DResult {
  Eigen::VectorXd coeffs;
  ErrorNorms errors;
  SolveReport report;
  int n_dof = 0;
};

// -u'' = s on the mesh domain, both ends Dirichlet (non-symmetric Nitsche).
// Integrals are split at every basis breakpoint, so no correction is needed.
Solve1DResult solve_poisson_1d(const Mesh1D& mesh, const Exact1D& exact);

ErrorNorms error_norms_1d(const Mesh1D& mesh, const Exact1D& exact, const Eigen::VectorXd& coeffs);

} // namespace mollified
