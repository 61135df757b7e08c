#include "mollified/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mollified/errors.hpp"

namespace mollified {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::set<std::string> kExperiments{"sin1d", "sin2d", "plate_hole", "patch"};

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
}

template <class T>
T get(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

MollifierKind parse_kind(const std::string& s) {
  if (s == "quartic") return MollifierKind::quartic;
  if (s == "bspline") return MollifierKind::bspline;
  throw ConfigError("unknown mollifier '" + s + "' (quartic or bspline)");
}

SignedDistance domain_of(const RunConfig& cfg) {
  const SignedDistance square = SignedDistance::box({0.0, 0.0}, {1.0, 1.0});
  if (cfg.experiment == "plate_hole")
    return SignedDistance::intersection(square, SignedDistance::circle({0.0, 0.0}, PlateHole{}.radius, false));
  return square;
}

Problem problem_of(const RunConfig& cfg) {
  Problem p;
  if (cfg.experiment == "plate_hole") {
    const PlateHole ph;
    p.kind = ProblemKind::elasticity;
    p.material = ph.material;
    p.exact = plate_hole_solution(ph);
  } else if (cfg.experiment == "sin2d") {
    p.exact = exact_solution("sin2d");
  } else {
    throw ConfigError("experiment '" + cfg.experiment + "' has no 2D convergence study");
  }
  return p;
}

AssemblyOptions assembly_of(const RunConfig& cfg) {
  AssemblyOptions a;
  a.quadrature = cfg.quadrature;
  a.vci = cfg.vci;
  a.cut_scaling = cfg.cut_scaling;
  a.threads = cfg.threads;
  return a;
}

Partition seed_partition(const std::vector<Point>& seeds) {
  BoundingBox b{seeds.front(), seeds.front()};
  for (Point p : seeds) {
    b.lo = {std::min(b.lo.x, p.x), std::min(b.lo.y, p.y)};
    b.hi = {std::max(b.hi.x, p.x), std::max(b.hi.y, p.y)};
  }
  const double w = b.hi.x - b.lo.x, h = b.hi.y - b.lo.y;
  const double pad = std::max(std::sqrt(std::max(w * h, 1e-300) / seeds.size()), 1e-3 * std::max(w, h));
  b.lo = b.lo - Point{pad, pad};
  b.hi = b.hi + Point{pad, pad};
  return partition_from_voronoi(voronoi(seeds, b));
}

// 2 chi h for a lattice of spacing 1/n, or the configured width halved per level.
double lattice_hm(const RunConfig& cfg, int n, int level) {
  return cfg.hm > 0.0 ? cfg.hm * std::ldexp(1.0, -level) : 2.0 * cfg.chi / n;
}

Mesh mesh_from_partition(const RunConfig& cfg, const SignedDistance& domain, const Partition& p, double hm) {
  MeshOptions mo;
  mo.degree = cfg.degree;
  mo.kind = cfg.kind;
  mo.bspline_degree = cfg.mollifier_degree;
  mo.curved = cfg.curved;
  mo.mollifier_support = hm;
  if (hm <= 0.0 && cfg.chi != 1.0) {
    // h is only known after classification
    const Mesh probe = build_mesh(domain, p, mo);
    mo.mollifier_support = 2.0 * cfg.chi * probe.h();
  }
  return build_mesh(domain, p, mo);
}

Mesh patch_mesh(const RunConfig& cfg, int degree) {
  RunConfig c = cfg;
  c.degree = degree;
  c.curved = false;
  const SignedDistance square = SignedDistance::box({0.0, 0.0}, {1.0, 1.0});
  if (!c.seed_file.empty()) return mesh_from_partition(c, square, seed_partition(read_seeds_csv(c.seed_file)), c.hm);
  const int n = 8;
  const double hm = lattice_hm(c, n, 0);
  return mesh_from_partition(c, square, lattice_partition({n, c.ghost_layers, c.kappa * hm / 2, c.rng_seed}), hm);
}

std::vector<double> widths_1d(const RunConfig& cfg) { return cfg.cells.empty() ? default_cells_1d() : cfg.cells; }

void apply(RunConfig& cfg, const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "preset") {
      // handled by the caller
    } else if (k == "experiment") {
      cfg.experiment = get<std::string>(v, k);
    } else if (k == "degree") {
      cfg.degree = get<int>(v, k);
    } else if (k == "mollifier") {
      cfg.kind = parse_kind(get<std::string>(v, k));
    } else if (k == "mollifier_degree") {
      cfg.mollifier_degree = get<int>(v, k);
    } else if (k == "chi") {
      cfg.chi = get<double>(v, k);
    } else if (k == "hm") {
      cfg.hm = get<double>(v, k);
    } else if (k == "seed_file") {
      const std::string s = get<std::string>(v, k);
      cfg.seed_file = s.empty() || fs::path(s).is_absolute() ? s : join(base_dir, s);
    } else if (k == "grid") {
      cfg.grid = get<int>(v, k);
    } else if (k == "ghost_layers") {
      cfg.ghost_layers = get<int>(v, k);
    } else if (k == "kappa") {
      cfg.kappa = get<double>(v, k);
    } else if (k == "rng_seed") {
      cfg.rng_seed = get<std::uint64_t>(v, k);
    } else if (k == "cells") {
      cfg.cells = get<std::vector<double>>(v, k);
    } else if (k == "levels") {
      cfg.levels = get<int>(v, k);
    } else if (k == "curved") {
      cfg.curved = get<bool>(v, k);
    } else if (k == "domain_degree") {
      cfg.quadrature.domain_degree = get<int>(v, k);
    } else if (k == "boundary_points") {
      cfg.quadrature.boundary_points = get<int>(v, k);
    } else if (k == "vci") {
      cfg.vci = get<bool>(v, k);
    } else if (k == "cut_scaling") {
      cfg.cut_scaling = get<bool>(v, k);
    } else if (k == "threads") {
      cfg.threads = get<int>(v, k);
    } else if (k == "output_dir") {
      cfg.output_dir = get<std::string>(v, k);
    } else if (k == "basis_cell") {
      cfg.basis_cell = get<int>(v, k);
    } else if (k == "samples") {
      cfg.samples = get<int>(v, k);
    } else {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

double nearest_center_cell(const Mesh& mesh, Point target, int& best) {
  double d = std::numeric_limits<double>::infinity();
  best = -1;
  const auto& cells = mesh.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].label == CellLabel::exterior) continue;
    const double di = distance(cells[i].center, target);
    if (di < d) {
      d = di;
      best = static_cast<int>(i);
    }
  }
  return d;
}

} // namespace

std::vector<std::string> preset_names() { return {"paper-1d", "paper-square", "paper-plate"}; }

RunConfig preset(const std::string& name) {
  RunConfig c;
  if (name == "paper-1d") {
    c.experiment = "sin1d";
    c.kind = MollifierKind::bspline;
    c.mollifier_degree = 1;
    c.chi = 1.0;
    c.cells = default_cells_1d();
    c.levels = 6;
  } else if (name == "paper-square") {
    c.experiment = "sin2d";
    c.kind = MollifierKind::quartic;
    c.grid = 4;
    c.kappa = 0.15;
    c.rng_seed = 7;
    c.levels = 4;
    c.quadrature.domain_degree = 6;
  } else if (name == "paper-plate") {
    c.experiment = "plate_hole";
    c.kind = MollifierKind::quartic;
    c.grid = 6;
    c.kappa = 0.0;
    c.levels = 3;
    c.quadrature.domain_degree = 6;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

void apply_overrides(RunConfig& cfg, const std::string& json_text, const std::string& base_dir) {
  const json j = parse_json(json_text);
  apply(cfg, j, base_dir);
  if (cfg.experiment == "plate_hole" && j.is_object() && j.contains("degree") && !j.contains("curved"))
    cfg.curved = cfg.degree >= 2;
}

RunConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  const json j = parse_json(json_text);
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg = j.contains("preset") ? preset(get<std::string>(j["preset"], "preset")) : RunConfig{};
  apply(cfg, j, base_dir);
  if (cfg.experiment == "plate_hole" && !j.contains("curved")) cfg.curved = cfg.degree >= 2;
  validate(cfg);
  return cfg;
}

std::string to_json(const RunConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["degree"] = cfg.degree;
  j["mollifier"] = cfg.kind == MollifierKind::quartic ? "quartic" : "bspline";
  j["mollifier_degree"] = cfg.mollifier_degree;
  j["chi"] = cfg.chi;
  j["hm"] = cfg.hm;
  j["seed_file"] = cfg.seed_file;
  j["grid"] = cfg.grid;
  j["ghost_layers"] = cfg.ghost_layers;
  j["kappa"] = cfg.kappa;
  j["rng_seed"] = cfg.rng_seed;
  j["cells"] = cfg.cells;
  j["levels"] = cfg.levels;
  j["curved"] = cfg.curved;
  j["domain_degree"] = cfg.quadrature.domain_degree;
  j["boundary_points"] = cfg.quadrature.boundary_points;
  j["vci"] = cfg.vci;
  j["cut_scaling"] = cfg.cut_scaling;
  j["threads"] = cfg.threads;
  j["output_dir"] = cfg.output_dir;
  j["basis_cell"] = cfg.basis_cell;
  j["samples"] = cfg.samples;
  return j.dump(2);
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), fs::path(path).parent_path().string());
}

void validate(const RunConfig& cfg) {
  if (!kExperiments.count(cfg.experiment)) throw ConfigError("unknown experiment '" + cfg.experiment + "'");
  if (cfg.degree < 0 || cfg.degree > 3) throw ConfigError("degree must be in [0, 3]");
  if (cfg.dim() == 2 && cfg.degree < 1) throw ConfigError("2D experiments need degree >= 1");
  if (cfg.mollifier_degree < 1 || cfg.mollifier_degree > 3) throw ConfigError("mollifier_degree must be in [1, 3]");
  if (!(cfg.chi > 0.0) || !std::isfinite(cfg.chi)) throw ConfigError("chi must be positive");
  if (!std::isfinite(cfg.hm) || cfg.hm < 0.0) throw ConfigError("hm must be >= 0");
  if (cfg.grid < 1 || cfg.grid > 4096) throw ConfigError("grid must be in [1, 4096]");
  if (cfg.ghost_layers < 1 || cfg.ghost_layers > 4) throw ConfigError("ghost_layers must be in [1, 4]");
  if (!(cfg.kappa >= 0.0 && cfg.kappa * cfg.chi < 0.5)) throw ConfigError("kappa must be in [0, 0.5 / chi)");
  if (cfg.levels < 1 || cfg.levels > 12) throw ConfigError("levels must be in [1, 12]");
  for (double w : cfg.cells)
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("cell widths must be positive");
  if (cfg.quadrature.domain_degree > 20) throw ConfigError("domain_degree must be <= 20");
  if (cfg.quadrature.boundary_points < 1 || cfg.quadrature.boundary_points > 20)
    throw ConfigError("boundary_points must be in [1, 20]");
  if (cfg.threads < 0) throw ConfigError("threads must be >= 0");
  if (cfg.samples < 2 || cfg.samples > 2001) throw ConfigError("samples must be in [2, 2001]");
  if (!cfg.seed_file.empty() && !fs::is_regular_file(cfg.seed_file))
    throw ConfigError("seed file '" + cfg.seed_file + "' does not exist");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

double fit_slope(const std::vector<double>& h, const std::vector<double>& e) {
  const std::size_t n = h.size();
  if (n < 2 || e.size() != n) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(h[i]);
    my += std::log(e[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(h[i]) - mx;
    sxy += dx * (std::log(e[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

Mesh build_level_mesh(const RunConfig& cfg, int level) {
  const SignedDistance domain = domain_of(cfg);
  if (cfg.seed_file.empty() && cfg.experiment != "plate_hole") {
    const int n = cfg.grid << level;
    const double hm = lattice_hm(cfg, n, level);
    return mesh_from_partition(cfg, domain, lattice_partition({n, cfg.ghost_layers, cfg.kappa * hm / 2, cfg.rng_seed}),
                               hm);
  }
  Partition p;
  double hm0 = cfg.hm;
  if (!cfg.seed_file.empty()) {
    p = seed_partition(read_seeds_csv(cfg.seed_file));
  } else {
    const double hm = lattice_hm(cfg, cfg.grid, 0);
    p = lattice_partition({cfg.grid, cfg.ghost_layers, cfg.kappa * hm / 2, cfg.rng_seed});
  }
  for (int l = 0; l < level; ++l) p = refine_partition(p);
  return mesh_from_partition(cfg, domain, p, hm0 > 0.0 ? hm0 * std::ldexp(1.0, -level) : 0.0);
}

Mesh1D build_level_mesh_1d(const RunConfig& cfg, int level) {
  std::vector<double> w = widths_1d(cfg);
  for (int l = 0; l < level; ++l) w = bisect(w);
  return build_mesh_1d(w, {cfg.degree, cfg.kind, cfg.mollifier_degree, cfg.chi});
}

MeshSummary cmd_mesh(const RunConfig& cfg) {
  validate(cfg);
  ensure_dir(cfg.output_dir);
  MeshSummary s;
  if (cfg.dim() == 1) {
    const Mesh1D m = build_level_mesh_1d(cfg, 0);
    const std::string path = join(cfg.output_dir, "mesh.csv");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << "cell,label,lo,hi\n";
    for (std::size_t i = 0; i < m.cells.size(); ++i) {
      const bool ghost = i == 0 || i + 1 == m.cells.size();
      f << i << ',' << (ghost ? "ghost" : "interior") << ',' << format_double(m.cells[i].lo) << ','
        << format_double(m.cells[i].hi) << '\n';
    }
    if (!f) throw IoError("write to '" + path + "' failed");
    s.cells = static_cast<int>(m.cells.size());
    s.interior = s.cells - 2;
    s.ghost = 2;
    s.blocks = s.cells;
    s.h = 0.0;
    for (std::size_t i = 1; i + 1 < m.cells.size(); ++i) s.h = std::max(s.h, m.cells[i].length());
    s.hm = m.mollifier.support();
    s.files = {path};
    return s;
  }
  const Mesh m = cfg.experiment == "patch" ? patch_mesh(cfg, std::max(cfg.degree, 1)) : build_level_mesh(cfg, 0);
  const std::string csv = join(cfg.output_dir, "mesh.csv"), vtk = join(cfg.output_dir, "mesh.vtk");
  write_mesh_csv(csv, m);
  write_mesh_vtk(vtk, m);
  s.cells = static_cast<int>(m.cells().size());
  s.interior = m.count(CellLabel::interior);
  s.cut = m.count(CellLabel::cut);
  s.ghost = m.count(CellLabel::ghost);
  s.exterior = m.count(CellLabel::exterior);
  s.blocks = m.num_blocks();
  s.h = m.h();
  s.hm = m.mollifier().support();
  s.files = {csv, vtk};
  return s;
}

bool PatchReport::ok() const {
  return std::all_of(cases.begin(), cases.end(), [](const PatchCase& c) { return c.passed; });
}

PatchReport cmd_patch(const RunConfig& cfg) {
  validate(cfg);
  struct Spec {
    const char* name;
    const char* field;
    int degree;
    double tol_l2, tol_h1;
    bool expect_pass;
  };
  const Spec specs[] = {
      {"linear", "patch_linear", 1, 1e-9, 1e-8, true},
      {"quadratic", "patch_quadratic", 2, 1e-8, 1e-7, true},
      {"quadratic_with_linear_basis", "patch_quadratic", 1, 1e-8, 1e-7, false},
  };
  PatchReport rep;
  for (const Spec& sp : specs) {
    const Mesh m = patch_mesh(cfg, sp.degree);
    Problem pr;
    pr.exact = exact_solution(sp.field);
    const SolveResult r = run_problem(m, pr, assembly_of(cfg));
    PatchCase c;
    c.name = sp.name;
    c.degree = sp.degree;
    c.l2 = r.errors.l2;
    c.h1 = r.errors.h1_semi;
    c.tol_l2 = sp.tol_l2;
    c.tol_h1 = sp.tol_h1;
    c.expect_pass = sp.expect_pass;
    const bool within = c.l2 <= c.tol_l2 && c.h1 <= c.tol_h1;
    c.passed = within == sp.expect_pass;
    rep.cases.push_back(c);
  }
  ensure_dir(cfg.output_dir);
  const std::string path = join(cfg.output_dir, "patch.csv");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << "case,degree,L2,H1_semi,tol_L2,tol_H1,expected,passed\n";
  for (const PatchCase& c : rep.cases)
    f << c.name << ',' << c.degree << ',' << format_double(c.l2) << ',' << format_double(c.h1) << ','
      << format_double(c.tol_l2) << ',' << format_double(c.tol_h1) << ',' << (c.expect_pass ? "pass" : "fail") << ','
      << (c.passed ? 1 : 0) << '\n';
  if (!f) throw IoError("write to '" + path + "' failed");
  return rep;
}

ConvergeReport cmd_converge(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.experiment == "patch") throw ConfigError("the patch experiment has no convergence study; use patch");
  ensure_dir(cfg.output_dir);
  ConvergeReport rep;
  std::vector<double> hs, l2, h1, en;
  const auto record = [&](ErrorRow row) {
    hs.push_back(row.h);
    l2.push_back(row.errors.l2);
    h1.push_back(row.errors.h1_semi);
    en.push_back(row.errors.energy);
    rep.rows.push_back(row);
  };
  using clock = std::chrono::steady_clock;

  if (cfg.dim() == 1) {
    const Exact1D ex = exact_solution_1d("sin1d");
    std::vector<double> w = widths_1d(cfg);
    Mesh1D last;
    Eigen::VectorXd coeffs;
    for (int l = 0; l < cfg.levels; ++l) {
      const auto t0 = clock::now();
      last = build_mesh_1d(w, {cfg.degree, cfg.kind, cfg.mollifier_degree, cfg.chi});
      const Solve1DResult r = solve_poisson_1d(last, ex);
      ErrorRow row;
      row.n_c = static_cast<int>(w.size());
      row.h = *std::max_element(w.begin(), w.end());
      row.errors = r.errors;
      row.n_dof = r.n_dof;
      row.wall_time_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      record(row);
      coeffs = r.coeffs;
      w = bisect(w);
    }
    const std::string path = join(cfg.output_dir, "solution.csv");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << "x,u,du,u_exact\n";
    const int n = std::max(cfg.samples, 2);
    for (int i = 0; i < n; ++i) {
      const double x = last.lo + (last.hi - last.lo) * i / (n - 1);
      const auto v = evaluate_1d(last, coeffs, x);
      f << format_double(x) << ',' << format_double(v[0]) << ',' << format_double(v[1]) << ','
        << format_double(ex.u(x)) << '\n';
    }
    if (!f) throw IoError("write to '" + path + "' failed");
    rep.files.push_back(path);
  } else {
    const Problem pr = problem_of(cfg);
    const AssemblyOptions ao = assembly_of(cfg);
    for (int l = 0; l < cfg.levels; ++l) {
      const auto t0 = clock::now();
      const Mesh m = build_level_mesh(cfg, l);
      const SolveResult r = run_problem(m, pr, ao);
      ErrorRow row;
      row.n_c = m.num_domain_cells();
      row.h = m.h();
      row.errors = r.errors;
      row.n_dof = r.n_dof;
      row.wall_time_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      record(row);
      if (l + 1 == cfg.levels) {
        const std::string vtk = join(cfg.output_dir, "solution.vtk"), csv = join(cfg.output_dir, "solution.csv");
        write_solution_vtk(vtk, m, r.coeffs, pr.components());
        write_solution_csv(csv, m, r.coeffs, pr.components());
        rep.files.push_back(vtk);
        rep.files.push_back(csv);
      }
    }
  }
  rep.slope_l2 = fit_slope(hs, l2);
  rep.slope_h1 = fit_slope(hs, h1);
  rep.slope_energy = fit_slope(hs, en);

  const std::string errors = join(cfg.output_dir, "errors.csv");
  write_errors_csv(errors, rep.rows);
  const std::string rates = join(cfg.output_dir, "rates.csv");
  std::ofstream f(rates, std::ios::binary);
  if (!f) throw IoError("cannot open '" + rates + "' for writing");
  f << "norm,slope\nL2," << format_double(rep.slope_l2) << "\nH1_semi," << format_double(rep.slope_h1)
    << "\nenergy," << format_double(rep.slope_energy) << '\n';
  if (!f) throw IoError("write to '" + rates + "' failed");
  rep.files.insert(rep.files.begin(), {errors, rates});
  return rep;
}

BasisReport cmd_basis(const RunConfig& cfg) {
  validate(cfg);
  ensure_dir(cfg.output_dir);
  BasisReport rep;
  const std::string path = join(cfg.output_dir, "basis.csv");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  const int ns = cfg.samples;

  if (cfg.dim() == 1) {
    const Mesh1D m = build_level_mesh_1d(cfg, 0);
    const int nc = static_cast<int>(m.cells.size());
    int cell = cfg.basis_cell;
    if (cell < 0) cell = nc / 2;
    if (cell >= nc) throw ConfigError("basis_cell out of range (" + std::to_string(nc) + " cells)");
    const int nb = cfg.degree + 1;
    const auto basis_of = [&](int i) { return CellBasis({m.cells[i].center(), 0.0}, m.scale, cfg.degree, 1); };
    f << "x";
    for (int a = 0; a < nb; ++a) f << ",N" << a;
    for (int a = 0; a < nb; ++a) f << ",dN" << a;
    f << ",sum0\n";
    const double hw = m.mollifier.halfwidth();
    const double lo = m.cells[cell].lo - hw, hi = m.cells[cell].hi + hw;
    for (int s = 0; s < ns; ++s) {
      const double x = lo + (hi - lo) * s / (ns - 1);
      const BasisValue v = eval_1d(basis_of(cell), m.cells[cell], m.mollifier, x);
      double sum0 = 0.0;
      for (int i = 0; i < nc; ++i) sum0 += eval_1d(basis_of(i), m.cells[i], m.mollifier, x).values[0];
      f << format_double(x);
      for (int a = 0; a < nb; ++a) f << ',' << format_double(v.values[a]);
      for (int a = 0; a < nb; ++a) f << ',' << format_double(v.gradients[a][0]);
      f << ',' << format_double(sum0) << '\n';
    }
    rep.cell = cell;
  } else {
    const Mesh m = cfg.experiment == "patch" ? patch_mesh(cfg, std::max(cfg.degree, 1)) : build_level_mesh(cfg, 0);
    const auto& cells = m.cells();
    int cell = cfg.basis_cell;
    if (cell < 0) nearest_center_cell(m, {0.5, 0.5}, cell);
    if (cell < 0 || cell >= static_cast<int>(cells.size()))
      throw ConfigError("basis_cell out of range (" + std::to_string(cells.size()) + " cells)");
    const BasisEvaluator ev(m.mollifier(), m.degree(), m.h());
    const int nb = ev.size();
    f << "x,y";
    for (int a = 0; a < nb; ++a) f << ",N" << a;
    for (int a = 0; a < nb; ++a) f << ",dN" << a << "_dx,dN" << a << "_dy";
    f << ",sum0\n";
    const BoundingBox b = support(cells[cell].cell, m.mollifier()).polygon.bounds();
    BasisValue v, w;
    std::vector<int> near;
    for (int r = 0; r < ns; ++r)
      for (int s = 0; s < ns; ++s) {
        const Point p{b.lo.x + (b.hi.x - b.lo.x) * s / (ns - 1), b.lo.y + (b.hi.y - b.lo.y) * r / (ns - 1)};
        ev.evaluate(cells[cell].cell, cells[cell].center, p, v);
        double sum0 = 0.0;
        m.candidates(p, near);
        std::sort(near.begin(), near.end());
        for (int i : near)
          if (ev.evaluate(cells[i].cell, cells[i].center, p, w)) sum0 += w.values[0];
        f << format_double(p.x) << ',' << format_double(p.y);
        for (int a = 0; a < nb; ++a) f << ',' << format_double(v.values[a]);
        for (int a = 0; a < nb; ++a) f << ',' << format_double(v.gradients[a][0]) << ',' << format_double(v.gradients[a][1]);
        f << ',' << format_double(sum0) << '\n';
      }
    rep.cell = cell;
  }
  if (!f) throw IoError("write to '" + path + "' failed");
  rep.rows = ns * (cfg.dim() == 1 ? 1 : ns);
  rep.files = {path};
  return rep;
}

} // namespace mollified
