#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "mollified/basis.hpp"
#include "mollified/exact.hpp"
#include "mollified/mesh.hpp"
#include "mollified/quadrature.hpp"

namespace mollified {

enum class ProblemKind { poisson, elasticity };

struct Problem {
  ProblemKind kind = ProblemKind::poisson;
  Material material;
  // Supplies the source, the Dirichlet data and the Neumann data.
  ExactSolution exact;
  // Boundary points where this returns true are Neumann; all others are
  // Dirichlet. Empty means Dirichlet everywhere.
  std::function<bool(Point x, Point n)> neumann;

  int components() const { return kind == ProblemKind::poisson ? 1 : 2; }
};

struct QuadratureOptions {
  // Triangle rule degree for domain integrals; < 0 picks 1, 2, 3, 4 points
  // for degree 0 and 3, 4, 6 points for degrees 1, 2, 3.
  int domain_degree = -1;
  int boundary_points = 5;
  // Subdivide integration polygons along the kinks of this cell's basis
  // functions (straight meshes only). Used to check the correction vanishes
  // under exact integration.
  int split_cell = -1;
  int split_degree = 14;
};

struct AssemblyOptions {
  QuadratureOptions quadrature;
  bool vci = true;
  bool cut_scaling = true;
  IntegrationPath path = IntegrationPath::divergence;
  // Worker count; 0 reads MOLLIFIED_NUM_THREADS, then the hardware count.
  int threads = 0;
};

int resolve_threads(int requested);

// Quadrature points of one integration cell with the basis values of every
// cell active on it, stored densely per point over `active`.
struct CellPoints {
  std::vector<int> active; // mesh cell indices, ascending
  std::vector<QuadraturePoint> domain;
  std::vector<BoundaryPoint> boundary;
  // [point][active][basis]
  std::vector<double> dval, bval;
  std::vector<std::array<double, 2>> dgrad, bgrad;
};

// Per integration cell points and basis values, in mesh cell order (empty
// for cells without an integration domain).
std::vector<CellPoints> tabulate(const Mesh& mesh, const AssemblyOptions& opts);

// Gradient corrections: for mesh cell j, basis a, direction k the
// coefficients λ over ψ_j (monomials of degree q^p - 1 in the cell's scaled
// coordinates), stored at lambda[j][(a * 2 + k) * n_psi + b].
struct VciCorrection {
  int n_psi = 0;
  std::vector<std::vector<double>> lambda;
};

VciCorrection vci_correct(const Mesh& mesh, const std::vector<CellPoints>& pts, int threads = 1);

// Largest integration-by-parts defect |Σ w ∂̃_k N ψ + Σ w N ∂_k ψ - Σ_Γ w N ψ n_k|
// over all basis functions, directions and ψ, relative to the scale of
// the boundary term. With an empty correction the raw defect is returned.
double vci_defect(const Mesh& mesh, const std::vector<CellPoints>& pts, const VciCorrection& vci);

struct DiscreteSystem {
  Eigen::SparseMatrix<double> matrix; // rows test, columns trial
  Eigen::VectorXd rhs;
  Eigen::VectorXd scaling; // diagonal basis scaling (ones when disabled)
  int block_size = 0;      // basis size * components
};

DiscreteSystem assemble(const Mesh& mesh, const Problem& problem, const std::vector<CellPoints>& pts,
                        const VciCorrection& vci, const AssemblyOptions& opts);

struct SolveReport {
  double residual = 0.0;
  bool refined = false;
};

// Solves the scaled system and returns unscaled coefficients, ordered
// (block, basis, component).
Eigen::VectorXd solve(const DiscreteSystem& sys, SolveReport* report = nullptr);

// Dense LU with partial pivoting and one refinement step when needed.
Eigen::VectorXd solve_dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, SolveReport* report = nullptr);

// Evaluates the discrete field at p.
FieldValue evaluate_solution(const Mesh& mesh, const Eigen::VectorXd& coeffs, int components, Point p,
                             IntegrationPath path = IntegrationPath::divergence);

struct ErrorNorms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double energy = 0.0;
};

ErrorNorms error_norms(const Mesh& mesh, const Problem& problem, const Eigen::VectorXd& coeffs, int degree = -1,
                       int threads = 0);

struct SolveResult {
  Eigen::VectorXd coeffs;
  ErrorNorms errors;
  SolveReport report;
  int n_dof = 0;
};

// tabulate + vci_correct + assemble + solve + error_norms.
SolveResult run_problem(const Mesh& mesh, const Problem& problem, const AssemblyOptions& opts);

// Coefficients that make the discrete field equal the polynomial g (one
// Poly2 per component) exactly.
Eigen::VectorXd interpolate_polynomial(const Mesh& mesh, const std::vector<Poly2>& g);

} // namespace mollified
