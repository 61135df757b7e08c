#include "mollified/mollified.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <variant>
#include <vector>

#include "mollified/driver.hpp"
#include "mollified/errors.hpp"
#include "mollified/mollifier.hpp"

struct mollified_config {
  mollified::RunConfig cfg;
};

struct mollified_result {
  mollified_command cmd;
  std::variant<mollified::MeshSummary, mollified::PatchReport, mollified::ConvergeReport, mollified::BasisReport> data;
  std::vector<std::string> files;
};

namespace {

thread_local std::string g_last_error;

mollified_status fail(mollified_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
mollified_status guard(F&& f) {
  try {
    g_last_error.clear();
    f();
    return MOLLIFIED_OK;
  } catch (const mollified::ConfigError& e) {
    return fail(MOLLIFIED_CONFIG_ERROR, e.what());
  } catch (const mollified::IoError& e) {
    return fail(MOLLIFIED_IO_ERROR, e.what());
  } catch (const mollified::InvalidArgument& e) {
    return fail(MOLLIFIED_INVALID_ARGUMENT, e.what());
  } catch (const mollified::DegenerateGeometry& e) {
    return fail(MOLLIFIED_DEGENERATE_GEOMETRY, e.what());
  } catch (const mollified::SingularSystem& e) {
    return fail(MOLLIFIED_SINGULAR_SYSTEM, e.what());
  } catch (const mollified::CoverageError& e) {
    return fail(MOLLIFIED_COVERAGE_ERROR, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MOLLIFIED_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(MOLLIFIED_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(MOLLIFIED_INTERNAL_ERROR, "unknown error");
  }
}

mollified_status null_arg(const char* what) { return fail(MOLLIFIED_INVALID_ARGUMENT, std::string(what) + " is null"); }

mollified::Mollifier1D kernel(mollified_kernel kind, int degree, double support) {
  if (!(support > 0.0)) throw mollified::InvalidArgument("support must be positive");
  if (kind == MOLLIFIED_QUARTIC) return mollified::Mollifier1D::quartic(support);
  if (kind == MOLLIFIED_BSPLINE) return mollified::Mollifier1D::bspline(degree, support);
  throw mollified::InvalidArgument("unknown kernel");
}

template <class T>
const T* as(const mollified_result* r) {
  return r ? std::get_if<T>(&r->data) : nullptr;
}

} // namespace

extern "C" {

const char* mollified_last_error(void) { return g_last_error.c_str(); }

const char* mollified_status_name(mollified_status status) {
  switch (status) {
  case MOLLIFIED_OK: return "ok";
  case MOLLIFIED_INVALID_ARGUMENT: return "invalid argument";
  case MOLLIFIED_DEGENERATE_GEOMETRY: return "degenerate geometry";
  case MOLLIFIED_SINGULAR_SYSTEM: return "singular system";
  case MOLLIFIED_COVERAGE_ERROR: return "coverage error";
  case MOLLIFIED_CONFIG_ERROR: return "config error";
  case MOLLIFIED_IO_ERROR: return "io error";
  case MOLLIFIED_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

int mollified_preset_count(void) { return static_cast<int>(mollified::preset_names().size()); }

const char* mollified_preset_name(int index) {
  static const std::vector<std::string> names = mollified::preset_names();
  if (index < 0 || index >= static_cast<int>(names.size())) return nullptr;
  return names[index].c_str();
}

mollified_status mollified_config_default(mollified_config** out) {
  if (!out) return null_arg("out");
  return guard([&] { *out = new mollified_config{}; });
}

mollified_status mollified_config_preset(const char* name, mollified_config** out) {
  if (!name) return null_arg("name");
  if (!out) return null_arg("out");
  return guard([&] { *out = new mollified_config{mollified::preset(name)}; });
}

mollified_status mollified_config_parse(const char* json, mollified_config** out) {
  if (!json) return null_arg("json");
  if (!out) return null_arg("out");
  return guard([&] { *out = new mollified_config{mollified::parse_config(json)}; });
}

mollified_status mollified_config_load(const char* path, mollified_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guard([&] { *out = new mollified_config{mollified::load_config(path)}; });
}

mollified_status mollified_config_override(mollified_config* cfg, const char* json) {
  if (!cfg) return null_arg("cfg");
  if (!json) return null_arg("json");
  return guard([&] {
    mollified::RunConfig c = cfg->cfg;
    mollified::apply_overrides(c, json);
    mollified::validate(c);
    cfg->cfg = c;
  });
}

mollified_status mollified_config_set_output_dir(mollified_config* cfg, const char* dir) {
  if (!cfg) return null_arg("cfg");
  if (!dir || !*dir) return null_arg("dir");
  cfg->cfg.output_dir = dir;
  return MOLLIFIED_OK;
}

mollified_status mollified_config_to_json(const mollified_config* cfg, char** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guard([&] {
    const std::string s = mollified::to_json(cfg->cfg);
    char* buf = static_cast<char*>(std::malloc(s.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, s.c_str(), s.size() + 1);
    *out = buf;
  });
}

void mollified_config_free(mollified_config* cfg) { delete cfg; }

void mollified_free_string(char* s) { std::free(s); }

mollified_status mollified_run(const mollified_config* cfg, mollified_command cmd, mollified_result** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guard([&] {
    auto r = std::make_unique<mollified_result>();
    r->cmd = cmd;
    switch (cmd) {
    case MOLLIFIED_CMD_MESH: {
      auto s = mollified::cmd_mesh(cfg->cfg);
      r->files = s.files;
      r->data = std::move(s);
      break;
    }
    case MOLLIFIED_CMD_PATCH: {
      r->data = mollified::cmd_patch(cfg->cfg);
      r->files = {cfg->cfg.output_dir + "/patch.csv"};
      break;
    }
    case MOLLIFIED_CMD_CONVERGE: {
      auto s = mollified::cmd_converge(cfg->cfg);
      r->files = s.files;
      r->data = std::move(s);
      break;
    }
    case MOLLIFIED_CMD_BASIS: {
      auto s = mollified::cmd_basis(cfg->cfg);
      r->files = s.files;
      r->data = std::move(s);
      break;
    }
    default:
      throw mollified::InvalidArgument("unknown command");
    }
    *out = r.release();
  });
}

void mollified_result_free(mollified_result* r) { delete r; }

mollified_command mollified_result_command(const mollified_result* r) { return r ? r->cmd : MOLLIFIED_CMD_MESH; }

int mollified_result_passed(const mollified_result* r) {
  if (!r) return 0;
  if (const auto* p = as<mollified::PatchReport>(r)) return p->ok() ? 1 : 0;
  return 1;
}

size_t mollified_result_file_count(const mollified_result* r) { return r ? r->files.size() : 0; }

const char* mollified_result_file(const mollified_result* r, size_t i) {
  if (!r || i >= r->files.size()) return nullptr;
  return r->files[i].c_str();
}

size_t mollified_result_row_count(const mollified_result* r) {
  const auto* c = as<mollified::ConvergeReport>(r);
  return c ? c->rows.size() : 0;
}

mollified_status mollified_result_row(const mollified_result* r, size_t i, mollified_error_row* out) {
  if (!out) return null_arg("out");
  const auto* c = as<mollified::ConvergeReport>(r);
  if (!c) return fail(MOLLIFIED_INVALID_ARGUMENT, "result has no error rows");
  if (i >= c->rows.size()) return fail(MOLLIFIED_INVALID_ARGUMENT, "row index out of range");
  const mollified::ErrorRow& e = c->rows[i];
  *out = {e.n_c, e.h, e.errors.l2, e.errors.h1_semi, e.errors.energy, e.n_dof, e.wall_time_ms};
  return MOLLIFIED_OK;
}

mollified_status mollified_result_slopes(const mollified_result* r, double* l2, double* h1_semi, double* energy) {
  const auto* c = as<mollified::ConvergeReport>(r);
  if (!c) return fail(MOLLIFIED_INVALID_ARGUMENT, "result has no slopes");
  if (l2) *l2 = c->slope_l2;
  if (h1_semi) *h1_semi = c->slope_h1;
  if (energy) *energy = c->slope_energy;
  return MOLLIFIED_OK;
}

size_t mollified_result_patch_count(const mollified_result* r) {
  const auto* p = as<mollified::PatchReport>(r);
  return p ? p->cases.size() : 0;
}

mollified_status mollified_result_patch_case(const mollified_result* r, size_t i, mollified_patch_case* out) {
  if (!out) return null_arg("out");
  const auto* p = as<mollified::PatchReport>(r);
  if (!p) return fail(MOLLIFIED_INVALID_ARGUMENT, "result has no patch cases");
  if (i >= p->cases.size()) return fail(MOLLIFIED_INVALID_ARGUMENT, "case index out of range");
  const mollified::PatchCase& c = p->cases[i];
  *out = {c.name.c_str(), c.degree, c.l2, c.h1, c.tol_l2, c.tol_h1, c.expect_pass ? 1 : 0, c.passed ? 1 : 0};
  return MOLLIFIED_OK;
}

mollified_status mollified_result_mesh(const mollified_result* r, mollified_mesh_summary* out) {
  if (!out) return null_arg("out");
  const auto* m = as<mollified::MeshSummary>(r);
  if (!m) return fail(MOLLIFIED_INVALID_ARGUMENT, "result has no mesh summary");
  *out = {m->cells, m->interior, m->cut, m->ghost, m->exterior, m->blocks, m->h, m->hm};
  return MOLLIFIED_OK;
}

mollified_status mollified_result_basis(const mollified_result* r, int* cell, int* rows) {
  const auto* b = as<mollified::BasisReport>(r);
  if (!b) return fail(MOLLIFIED_INVALID_ARGUMENT, "result has no basis dump");
  if (cell) *cell = b->cell;
  if (rows) *rows = b->rows;
  return MOLLIFIED_OK;
}

mollified_status mollified_kernel_eval(mollified_kernel kind, int degree, double support, double x, int k,
                                       double* out) {
  if (!out) return null_arg("out");
  return guard([&] {
    if (k < 0) throw mollified::InvalidArgument("derivative order must be >= 0");
    *out = kernel(kind, degree, support).deriv(x, k);
  });
}

mollified_status mollified_kernel_moment(mollified_kernel kind, int degree, double support, int s, double* out) {
  if (!out) return null_arg("out");
  return guard([&] {
    if (s < 0) throw mollified::InvalidArgument("moment order must be >= 0");
    *out = kernel(kind, degree, support).moment(s);
  });
}

} // extern "C"
