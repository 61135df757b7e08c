#include <doctest.h>

#include <cmath>
#include <random>

#include "mollified/errors.hpp"
#include "mollified/fem.hpp"

using namespace mollified;

namespace {

SignedDistance unit_square() { return SignedDistance::box({0, 0}, {1, 1}); }

Mesh square_mesh(int n, int degree, double kappa = 0.15, std::uint64_t seed = 7) {
  const double hm = 2.0 / n;
  MeshOptions o;
  o.degree = degree;
  return build_mesh(unit_square(), lattice_partition({n, 1, kappa * hm / 2, seed}), o);
}

Poly2 make_poly(int deg, std::initializer_list<std::array<double, 3>> terms) {
  Poly2 p(deg);
  for (const auto& t : terms) p.at(static_cast<int>(t[0]), static_cast<int>(t[1])) = t[2];
  return p;
}

Problem poisson(const std::string& name) {
  Problem p;
  p.exact = exact_solution(name);
  return p;
}

Eigen::MatrixXd dense(const DiscreteSystem& s) { return Eigen::MatrixXd(s.matrix); }

} // namespace

TEST_CASE("Kirsch solution") {
  const PlateHole ph;
  const double s = ph.traction, R = ph.radius;
  // Hoop stress concentration at the hole equator and compression at the pole.
  CHECK(plate_hole_stress(ph, {R, 0})[1] == doctest::Approx(3 * s).epsilon(1e-12));
  CHECK(plate_hole_stress(ph, {0, R})[0] == doctest::Approx(-s).epsilon(1e-12));
  const auto far = plate_hole_stress(ph, {300.0, 400.0});
  CHECK(std::abs(far[0]) < 1e-5 * s);
  CHECK(far[1] == doctest::Approx(s).epsilon(1e-5));
  CHECK(std::abs(far[2]) < 1e-5 * s);

  const ExactSolution ex = plate_hole_solution(ph);
  const auto d = plane_stress(ph.material);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double r = R + u(rng) * 1.2, t = u(rng) * M_PI / 2;
    const Point x{r * std::cos(t), r * std::sin(t)};
    // Hooke's law applied to the displacement gradient.
    const FieldValue f = ex.field(x);
    const double eps[3] = {f.grad[0][0], f.grad[1][1], f.grad[0][1] + f.grad[1][0]};
    const auto ref = plate_hole_stress(ph, x);
    for (int i = 0; i < 3; ++i) {
      const double sig = d[i][0] * eps[0] + d[i][1] * eps[1] + d[i][2] * eps[2];
      CHECK(std::abs(sig - ref[i]) < 1e-9 * s);
    }
    // Equilibrium by central differences.
    const double hh = 1e-5;
    const auto sxp = plate_hole_stress(ph, {x.x + hh, x.y}), sxm = plate_hole_stress(ph, {x.x - hh, x.y});
    const auto syp = plate_hole_stress(ph, {x.x, x.y + hh}), sym = plate_hole_stress(ph, {x.x, x.y - hh});
    CHECK(std::abs((sxp[0] - sxm[0] + syp[2] - sym[2]) / (2 * hh)) < 1e-3 * s);
    CHECK(std::abs((sxp[2] - sxm[2] + syp[1] - sym[1]) / (2 * hh)) < 1e-3 * s);
    const auto b = ex.source(x);
    CHECK(b[0] == 0.0);
    CHECK(b[1] == 0.0);
  }
  // Traction-free hole.
  for (int k = 0; k <= 8; ++k) {
    const double t = k * M_PI / 16;
    const Point n{std::cos(t), std::sin(t)};
    const auto st = plate_hole_stress(ph, R * n);
    CHECK(std::abs(st[0] * n.x + st[2] * n.y) < 1e-9 * s);
    CHECK(std::abs(st[2] * n.x + st[1] * n.y) < 1e-9 * s);
  }
}

TEST_CASE("manufactured sources") {
  const double hh = 1e-4;
  for (const char* name : {"sin2d", "patch_linear", "patch_quadratic"}) {
    const ExactSolution ex = exact_solution(name);
    for (Point x : {Point{0.3, 0.7}, Point{0.61, 0.18}}) {
      const auto u = [&](double a, double b) { return ex.field({a, b}).u[0]; };
      const double lap = (u(x.x + hh, x.y) + u(x.x - hh, x.y) + u(x.x, x.y + hh) + u(x.x, x.y - hh) - 4 * u(x.x, x.y)) /
                         (hh * hh);
      CHECK(ex.source(x)[0] == doctest::Approx(-lap).epsilon(1e-5).scale(1.0));
      const FieldValue f = ex.field(x);
      CHECK(f.grad[0][0] == doctest::Approx((u(x.x + hh, x.y) - u(x.x - hh, x.y)) / (2 * hh)).epsilon(1e-6));
      CHECK(f.grad[0][1] == doctest::Approx((u(x.x, x.y + hh) - u(x.x, x.y - hh)) / (2 * hh)).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(exact_solution("nope"), InvalidArgument);
}

TEST_CASE("correction removes the integration defect") {
  for (int q : {1, 2}) {
    CAPTURE(q);
    const Mesh mesh = square_mesh(4, q);
    AssemblyOptions o;
    const auto pts = tabulate(mesh, o);
    CHECK(vci_defect(mesh, pts, {}) > 1e-6);
    const VciCorrection vci = vci_correct(mesh, pts);
    CHECK(vci.n_psi == basis_size(q - 1, 2));
    CHECK(vci_defect(mesh, pts, vci) <= 1e-12);
  }
}

TEST_CASE("correction vanishes under exact integration") {
  const Mesh mesh = square_mesh(4, 1);
  // An interior cell.
  int j = -1;
  for (std::size_t i = 0; i < mesh.cells().size(); ++i)
    if (mesh.cells()[i].label == CellLabel::interior && distance(mesh.cells()[i].center, {0.5, 0.5}) < 0.2)
      j = static_cast<int>(i);
  REQUIRE(j >= 0);
  AssemblyOptions o;
  o.quadrature.split_cell = j;
  const auto pts = tabulate(mesh, o);
  const VciCorrection vci = vci_correct(mesh, pts);
  double grad_scale = 0.0;
  for (const CellPoints& cp : pts)
    for (std::size_t i = 0; i < cp.active.size(); ++i)
      if (cp.active[i] == j)
        for (std::size_t q = 0; q < cp.domain.size(); ++q)
          for (int a = 0; a < 3; ++a) {
            const auto& g = cp.dgrad[(q * cp.active.size() + i) * 3 + a];
            grad_scale = std::max(grad_scale, std::hypot(g[0], g[1]));
          }
  REQUIRE(grad_scale > 0.0);
  double lam = 0.0;
  for (double l : vci.lambda[j]) lam = std::max(lam, std::abs(l));
  CHECK(lam <= 1e-8 * grad_scale);

  // Default quadrature needs a visible correction for the same cell.
  const VciCorrection plain = vci_correct(mesh, tabulate(mesh, {}));
  double lam0 = 0.0;
  for (double l : plain.lambda[j]) lam0 = std::max(lam0, std::abs(l));
  CHECK(lam0 > 1e-6 * grad_scale);
}

TEST_CASE("patch tests on the perturbed 36-cell mesh") {
  SUBCASE("linear") {
    const Mesh mesh = square_mesh(6, 1);
    CHECK(mesh.num_domain_cells() == 36);
    const SolveResult r = run_problem(mesh, poisson("patch_linear"), {});
    CHECK(r.errors.l2 <= 1e-9);
    CHECK(r.errors.h1_semi <= 1e-8);
  }
  SUBCASE("quadratic") {
    const Mesh mesh = square_mesh(6, 2);
    const SolveResult r = run_problem(mesh, poisson("patch_quadratic"), {});
    CHECK(r.errors.l2 <= 1e-8);
    CHECK(r.errors.h1_semi <= 1e-7);
  }
  SUBCASE("linear basis misses the quadratic field") {
    const Mesh mesh = square_mesh(6, 1);
    const SolveResult r = run_problem(mesh, poisson("patch_quadratic"), {});
    CHECK(r.errors.l2 > 1e-5);
  }
  SUBCASE("without the correction the patch test fails") {
    const Mesh mesh = square_mesh(6, 1);
    AssemblyOptions o;
    o.vci = false;
    const SolveResult r = run_problem(mesh, poisson("patch_linear"), o);
    CHECK(r.errors.h1_semi > 1e-6);
  }
}

TEST_CASE("elastic patch test") {
  // u = (0.1 + x + 2y, -0.3 + 0.5x - y) reproduced with Dirichlet data.
  Problem p;
  p.kind = ProblemKind::elasticity;
  p.material = {10.0, 0.25};
  p.exact.name = "affine";
  p.exact.components = 2;
  p.exact.field = [](Point x) {
    FieldValue f;
    f.u = {0.1 + x.x + 2 * x.y, -0.3 + 0.5 * x.x - x.y};
    f.grad = {{{1.0, 2.0}, {0.5, -1.0}}};
    return f;
  };
  p.exact.source = [](Point) { return std::array<double, 2>{0.0, 0.0}; };
  const Mesh mesh = square_mesh(4, 1);
  const SolveResult r = run_problem(mesh, p, {});
  CHECK(r.errors.l2 <= 1e-9);
  CHECK(r.errors.energy <= 1e-8);

  // Neumann on the right edge with the exact traction.
  p.neumann = [](Point x, Point) { return x.x > 1.0 - 1e-9; };
  const SolveResult rn = run_problem(mesh, p, {});
  CHECK(rn.errors.l2 <= 1e-9);
}

TEST_CASE("Galerkin consistency and asymmetry") {
  const Mesh mesh = square_mesh(4, 2);
  AssemblyOptions o;
  const auto pts = tabulate(mesh, o);
  const auto vci = vci_correct(mesh, pts);
  const Problem pr = poisson("patch_quadratic");
  const DiscreteSystem sys = assemble(mesh, pr, pts, vci, o);
  const Poly2 g = make_poly(2, {{0, 0, 1}, {1, 0, 1}, {0, 1, 2}, {2, 0, 1}, {1, 1, 3}, {0, 2, 2}});
  const Eigen::VectorXd x = interpolate_polynomial(mesh, {g});
  // The interpolant reproduces the field.
  for (Point p : {Point{0.2, 0.3}, Point{0.77, 0.51}, Point{0.0, 1.0}})
    CHECK(evaluate_solution(mesh, x, 1, p).u[0] == doctest::Approx(g(p)).epsilon(1e-10));
  CHECK((sys.matrix * x - sys.rhs).norm() <= 1e-10 * sys.rhs.norm());
  const Eigen::MatrixXd a = dense(sys);
  CHECK((a - a.transpose()).norm() > 1e-3 * a.norm());
}

TEST_CASE("dense solver") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(50, 50);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) a(i, j) = nd(rng) + (i == j ? 20.0 : 0.0);
  Eigen::VectorXd b(50);
  for (int i = 0; i < 50; ++i) b(i) = nd(rng);
  SolveReport rep;
  const Eigen::VectorXd x = solve_dense(a, b, &rep);
  const Eigen::VectorXd ref = a.inverse() * b;
  CHECK((x - ref).norm() <= 1e-12 * ref.norm());
  CHECK(rep.residual <= 1e-10);

  const Eigen::VectorXd y = solve_dense(Eigen::MatrixXd::Identity(5, 5), b.head(5));
  CHECK(y == b.head(5));

  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(4, 4);
  s(3, 3) = 0.0;
  CHECK_THROWS_AS(solve_dense(s, Eigen::VectorXd::Ones(4)), SingularSystem);
}

TEST_CASE("assembly is identical for any worker count") {
  const Mesh mesh = square_mesh(4, 2);
  const Problem pr = poisson("sin2d");
  std::vector<Eigen::MatrixXd> mats;
  std::vector<Eigen::VectorXd> rhs;
  for (int t : {1, 3}) {
    AssemblyOptions o;
    o.threads = t;
    const auto pts = tabulate(mesh, o);
    const DiscreteSystem s = assemble(mesh, pr, pts, vci_correct(mesh, pts, t), o);
    mats.push_back(dense(s));
    rhs.push_back(s.rhs);
  }
  CHECK(mats[0].cwiseNotEqual(mats[1]).count() == 0);
  CHECK(rhs[0].cwiseNotEqual(rhs[1]).count() == 0);
}

TEST_CASE("support scaling does not change the solution") {
  const Mesh mesh = square_mesh(4, 1);
  const Problem pr = poisson("sin2d");
  AssemblyOptions a, b;
  b.cut_scaling = false;
  const auto pts = tabulate(mesh, a);
  const auto vci = vci_correct(mesh, pts);
  const DiscreteSystem sa = assemble(mesh, pr, pts, vci, a);
  const DiscreteSystem sb = assemble(mesh, pr, pts, vci, b);
  CHECK(sa.scaling.minCoeff() >= 1.0);
  CHECK(sa.scaling.maxCoeff() > 1.0);
  CHECK(sb.scaling.isOnes());
  const Eigen::VectorXd xa = solve(sa), xb = solve(sb);
  CHECK((xa - xb).norm() <= 1e-8 * xb.norm());
}

TEST_CASE("error norms") {
  const Mesh mesh = square_mesh(4, 1);
  const Problem pr = poisson("sin2d");
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(mesh.num_blocks() * 3);
  const ErrorNorms e = error_norms(mesh, pr, zero);
  CHECK(e.l2 == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(e.h1_semi == doctest::Approx(M_PI / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(e.energy == doctest::Approx(e.h1_semi).epsilon(1e-12));

  const Problem lin = poisson("patch_linear");
  const Eigen::VectorXd x = interpolate_polynomial(mesh, {make_poly(1, {{1, 0, 1}, {0, 1, 2}})});
  const ErrorNorms z = error_norms(mesh, lin, x);
  CHECK(z.l2 <= 1e-12);
  CHECK(z.h1_semi <= 1e-12);
}

TEST_CASE("dual assembly") {
  const Problem pr = poisson("patch_quadratic");
  SUBCASE("aligned kinks integrate exactly without correction") {
    // On the unperturbed lattice every kink line runs along cell edges.
    const Mesh mesh = square_mesh(4, 2, 0.0);
    AssemblyOptions hi;
    hi.vci = false;
    hi.quadrature.domain_degree = 12;
    const SolveResult a = run_problem(mesh, pr, hi);
    const SolveResult b = run_problem(mesh, pr, {});
    CHECK((a.coeffs - b.coeffs).norm() <= 1e-9 * a.coeffs.norm());
    CHECK(a.errors.l2 <= 1e-9);
  }
  SUBCASE("perturbed") {
    const Mesh mesh = square_mesh(4, 2);
    AssemblyOptions hi;
    hi.quadrature.domain_degree = 12;
    const SolveResult a = run_problem(mesh, pr, hi);
    const SolveResult b = run_problem(mesh, pr, {});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
      const Point p{u(rng), u(rng)};
      CHECK(std::abs(evaluate_solution(mesh, a.coeffs, 1, p).u[0] - evaluate_solution(mesh, b.coeffs, 1, p).u[0]) <=
            1e-9);
    }
  }
}

TEST_CASE("singular correction system names the cell") {
  // One point per triangle cannot resolve quadratic ψ on the corner ghost supports.
  const Mesh mesh = square_mesh(4, 3, 0.0);
  AssemblyOptions o;
  o.quadrature.domain_degree = 1;
  const auto pts = tabulate(mesh, o);
  try {
    vci_correct(mesh, pts);
    FAIL("expected a singular system");
  } catch (const SingularSystem& e) {
    CHECK(std::string(e.what()).find("cell") != std::string::npos);
  }
}
