#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <string>

#include "mollified/mollified.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int report(mollified_status s) {
  std::fprintf(stderr, "error (%s): %s\n", mollified_status_name(s), mollified_last_error());
  return s == MOLLIFIED_CONFIG_ERROR || s == MOLLIFIED_IO_ERROR ? kExitConfig : kExitRuntime;
}

struct Options {
  std::string config, preset, out, set;
  double expect_l2 = NAN, expect_h1 = NAN, expect_energy = NAN;
};

int make_config(const Options& o, mollified_config** cfg) {
  mollified_status s;
  if (!o.config.empty() && !o.preset.empty()) {
    std::fprintf(stderr, "error: --config and --preset are exclusive\n");
    return kExitConfig;
  }
  if (!o.config.empty())
    s = mollified_config_load(o.config.c_str(), cfg);
  else if (!o.preset.empty())
    s = mollified_config_preset(o.preset.c_str(), cfg);
  else
    s = mollified_config_default(cfg);
  if (s != MOLLIFIED_OK) return report(s);
  if (!o.set.empty() && (s = mollified_config_override(*cfg, o.set.c_str())) != MOLLIFIED_OK) return report(s);
  if (!o.out.empty()) mollified_config_set_output_dir(*cfg, o.out.c_str());
  return kExitOk;
}

void print_files(const mollified_result* r) {
  for (size_t i = 0; i < mollified_result_file_count(r); ++i) std::printf("wrote %s\n", mollified_result_file(r, i));
}

int print_mesh(const mollified_result* r) {
  mollified_mesh_summary m;
  mollified_result_mesh(r, &m);
  std::printf("cells %d (interior %d, cut %d, ghost %d, exterior %d), blocks %d, h %.6g, h_m %.6g\n", m.cells,
              m.interior, m.cut, m.ghost, m.exterior, m.blocks, m.h, m.hm);
  return kExitOk;
}

int print_patch(const mollified_result* r) {
  for (size_t i = 0; i < mollified_result_patch_count(r); ++i) {
    mollified_patch_case c;
    mollified_result_patch_case(r, i, &c);
    std::printf("%-28s q=%d  L2 %.3e (tol %.0e)  H1 %.3e (tol %.0e)  expected %s  %s\n", c.name, c.degree, c.l2,
                c.tol_l2, c.h1_semi, c.tol_h1, c.expect_pass ? "pass" : "fail", c.passed ? "OK" : "BREACH");
  }
  return mollified_result_passed(r) ? kExitOk : kExitFailed;
}

int print_converge(const mollified_result* r, const Options& o) {
  std::printf("%8s %12s %12s %12s %12s %8s %10s\n", "n_c", "h", "L2", "H1_semi", "energy", "n_dof", "ms");
  for (size_t i = 0; i < mollified_result_row_count(r); ++i) {
    mollified_error_row e;
    mollified_result_row(r, i, &e);
    std::printf("%8d %12.5e %12.5e %12.5e %12.5e %8d %10.1f\n", e.n_c, e.h, e.l2, e.h1_semi, e.energy, e.n_dof,
                e.wall_time_ms);
  }
  double l2, h1, en;
  mollified_result_slopes(r, &l2, &h1, &en);
  std::printf("slopes: L2 %.3f  H1_semi %.3f  energy %.3f\n", l2, h1, en);
  int code = kExitOk;
  const auto check = [&](const char* name, double got, double want) {
    if (std::isnan(want)) return;
    const bool ok = got >= want;
    std::printf("%s slope %.3f >= %.3f: %s\n", name, got, want, ok ? "pass" : "FAIL");
    if (!ok) code = kExitFailed;
  };
  check("L2", l2, o.expect_l2);
  check("H1_semi", h1, o.expect_h1);
  check("energy", en, o.expect_energy);
  return code;
}

int print_basis(const mollified_result* r) {
  int cell = 0, rows = 0;
  mollified_result_basis(r, &cell, &rows);
  std::printf("cell %d, %d samples\n", cell, rows);
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mollified finite elements on Voronoi partitions"};
  app.require_subcommand(1);
  std::string presets;
  for (int i = 0; i < mollified_preset_count(); ++i) presets += (i ? ", " : "") + std::string(mollified_preset_name(i));
  app.footer("Presets: " + presets + "\nWorker count: MOLLIFIED_NUM_THREADS\n"
             "Exit codes: 0 success, 1 tolerance breach, 2 config error, 3 runtime error");

  Options o;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run config");
    sub->add_option("--preset", o.preset, "named preset");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--set", o.set, "JSON object of overrides, e.g. '{\"degree\":2}'");
  };
  CLI::App* mesh = app.add_subcommand("mesh", "write the clipped partition (mesh.csv, mesh.vtk)");
  CLI::App* patch = app.add_subcommand("patch", "linear and quadratic patch tests (patch.csv)");
  CLI::App* conv = app.add_subcommand("converge", "refinement study (errors.csv, rates.csv, solution)");
  CLI::App* basis = app.add_subcommand("basis", "sample one cell's basis on its support (basis.csv)");
  for (CLI::App* s : {mesh, patch, conv, basis}) add_common(s);
  conv->add_option("--expect-l2", o.expect_l2, "minimum L2 slope");
  conv->add_option("--expect-h1", o.expect_h1, "minimum H1 slope");
  conv->add_option("--expect-energy", o.expect_energy, "minimum energy slope");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  mollified_command cmd = MOLLIFIED_CMD_MESH;
  if (patch->parsed()) cmd = MOLLIFIED_CMD_PATCH;
  if (conv->parsed()) cmd = MOLLIFIED_CMD_CONVERGE;
  if (basis->parsed()) cmd = MOLLIFIED_CMD_BASIS;

  mollified_config* cfg = nullptr;
  if (const int code = make_config(o, &cfg); code != kExitOk) {
    mollified_config_free(cfg);
    return code;
  }
  mollified_result* res = nullptr;
  const mollified_status s = mollified_run(cfg, cmd, &res);
  mollified_config_free(cfg);
  if (s != MOLLIFIED_OK) return report(s);

  int code = kExitOk;
  switch (cmd) {
  case MOLLIFIED_CMD_MESH: code = print_mesh(res); break;
  case MOLLIFIED_CMD_PATCH: code = print_patch(res); break;
  case MOLLIFIED_CMD_CONVERGE: code = print_converge(res, o); break;
  case MOLLIFIED_CMD_BASIS: code = print_basis(res); break;
  }
  print_files(res);
  mollified_result_free(res);
  return code;
}
