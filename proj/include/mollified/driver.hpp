#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mollified/fem.hpp"
#include "mollified/fem1d.hpp"
#include "mollified/io.hpp"
#include "mollified/mesh.hpp"

namespace mollified {

// sin1d, sin2d, plate_hole or patch.
struct RunConfig {
  std::string experiment = "sin2d";
  int degree = 1;
  MollifierKind kind = MollifierKind::quartic;
  int mollifier_degree = 1;
  double chi = 1.0; // 1D: h_m = 2 chi max h_c
  double hm = 0.0;  // 2D: <= 0 selects 2 h

  std::string seed_file; // 2D seeds; replaces the lattice
  int grid = 4;
  int ghost_layers = 1;
  double kappa = 0.15; // perturbation amplitude kappa h_m / 2
  std::uint64_t rng_seed = 7;
  std::vector<double> cells; // 1D widths from the left
  int levels = 4;
  bool curved = false;

  QuadratureOptions quadrature;
  bool vci = true;
  bool cut_scaling = true;
  int threads = 0;

  std::string output_dir = ".";
  int basis_cell = -1; // -1 picks a cell near the middle
  int samples = 101;

  int dim() const { return experiment == "sin1d" ? 1 : 2; }
};

// paper-1d, paper-square, paper-plate. Throws ConfigError otherwise.
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();
// JSON object; "preset" selects the starting values, other keys override.
// Relative seed_file paths resolve against base_dir.
RunConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);
// Throws ConfigError on out-of-range parameters or missing files.
void validate(const RunConfig& cfg);
// Applies a JSON object of overrides.
void apply_overrides(RunConfig& cfg, const std::string& json_text, const std::string& base_dir = ".");
// Every key, in the form parse_config accepts.
std::string to_json(const RunConfig& cfg);

// Level-l mesh of a 2D experiment (lattice refined by doubling n, seed
// files by nested refinement, the plate by nested refinement).
Mesh build_level_mesh(const RunConfig& cfg, int level);
Mesh1D build_level_mesh_1d(const RunConfig& cfg, int level);

struct MeshSummary {
  int cells = 0, interior = 0, cut = 0, ghost = 0, exterior = 0, blocks = 0;
  double h = 0.0, hm = 0.0;
  std::vector<std::string> files;
};
MeshSummary cmd_mesh(const RunConfig& cfg);

struct PatchCase {
  std::string name;
  int degree = 1;
  double l2 = 0.0, h1 = 0.0;
  double tol_l2 = 0.0, tol_h1 = 0.0;
  bool expect_pass = true;
  bool passed = false; // outcome matched expectation
};
struct PatchReport {
  std::vector<PatchCase> cases;
  bool ok() const;
};
PatchReport cmd_patch(const RunConfig& cfg);

struct ConvergeReport {
  std::vector<ErrorRow> rows;
  double slope_l2 = 0.0, slope_h1 = 0.0, slope_energy = 0.0;
  std::vector<std::string> files;
};
ConvergeReport cmd_converge(const RunConfig& cfg);

struct BasisReport {
  int cell = -1;
  int rows = 0;
  std::vector<std::string> files;
};
BasisReport cmd_basis(const RunConfig& cfg);

// Least-squares slope of log e against log h.
double fit_slope(const std::vector<double>& h, const std::vector<double>& e);

} // namespace mollified
