#ifndef MOLLIFIED_H
#define MOLLIFIED_H

#include <stddef.h>

#if defined(_WIN32)
#define MOLLIFIED_API __declspec(dllexport)
#else
#define MOLLIFIED_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mollified_status {
  MOLLIFIED_OK = 0,
  MOLLIFIED_INVALID_ARGUMENT = 1,
  MOLLIFIED_DEGENERATE_GEOMETRY = 2,
  MOLLIFIED_SINGULAR_SYSTEM = 3,
  MOLLIFIED_COVERAGE_ERROR = 4,
  MOLLIFIED_CONFIG_ERROR = 5,
  MOLLIFIED_IO_ERROR = 6,
  MOLLIFIED_INTERNAL_ERROR = 7
} mollified_status;

typedef enum mollified_command {
  MOLLIFIED_CMD_MESH = 0,
  MOLLIFIED_CMD_PATCH = 1,
  MOLLIFIED_CMD_CONVERGE = 2,
  MOLLIFIED_CMD_BASIS = 3
} mollified_command;

typedef enum mollified_kernel { MOLLIFIED_BSPLINE = 0, MOLLIFIED_QUARTIC = 1 } mollified_kernel;

typedef struct mollified_config mollified_config;
typedef struct mollified_result mollified_result;

typedef struct mollified_error_row {
  int n_c;
  double h;
  double l2;
  double h1_semi;
  double energy;
  int n_dof;
  double wall_time_ms;
} mollified_error_row;

typedef struct mollified_patch_case {
  const char* name; /* owned by the result */
  int degree;
  double l2;
  double h1_semi;
  double tol_l2;
  double tol_h1;
  int expect_pass;
  int passed; /* outcome matched the expectation */
} mollified_patch_case;

typedef struct mollified_mesh_summary {
  int cells;
  int interior;
  int cut;
  int ghost;
  int exterior;
  int blocks;
  double h;
  double hm;
} mollified_mesh_summary;

/* Message of the last failed call on this thread ("" if none). */
MOLLIFIED_API const char* mollified_last_error(void);
MOLLIFIED_API const char* mollified_status_name(mollified_status status);

MOLLIFIED_API int mollified_preset_count(void);
MOLLIFIED_API const char* mollified_preset_name(int index);

MOLLIFIED_API mollified_status mollified_config_default(mollified_config** out);
MOLLIFIED_API mollified_status mollified_config_preset(const char* name, mollified_config** out);
/* JSON text; relative seed files resolve against the working directory. */
MOLLIFIED_API mollified_status mollified_config_parse(const char* json, mollified_config** out);
MOLLIFIED_API mollified_status mollified_config_load(const char* path, mollified_config** out);
/* Applies a JSON object of overrides and validates the result. */
MOLLIFIED_API mollified_status mollified_config_override(mollified_config* cfg, const char* json);
MOLLIFIED_API mollified_status mollified_config_set_output_dir(mollified_config* cfg, const char* dir);
/* Caller frees with free_string. */
MOLLIFIED_API mollified_status mollified_config_to_json(const mollified_config* cfg, char** out);
MOLLIFIED_API void mollified_config_free(mollified_config* cfg);
MOLLIFIED_API void mollified_free_string(char* s);

MOLLIFIED_API mollified_status mollified_run(const mollified_config* cfg, mollified_command cmd,
                                             mollified_result** out);
MOLLIFIED_API void mollified_result_free(mollified_result* r);

MOLLIFIED_API mollified_command mollified_result_command(const mollified_result* r);
/* Patch: every case met its expectation. Other commands: 1. */
MOLLIFIED_API int mollified_result_passed(const mollified_result* r);
MOLLIFIED_API size_t mollified_result_file_count(const mollified_result* r);
MOLLIFIED_API const char* mollified_result_file(const mollified_result* r, size_t i);

MOLLIFIED_API size_t mollified_result_row_count(const mollified_result* r);
MOLLIFIED_API mollified_status mollified_result_row(const mollified_result* r, size_t i, mollified_error_row* out);
MOLLIFIED_API mollified_status mollified_result_slopes(const mollified_result* r, double* l2, double* h1_semi,
                                                       double* energy);

MOLLIFIED_API size_t mollified_result_patch_count(const mollified_result* r);
MOLLIFIED_API mollified_status mollified_result_patch_case(const mollified_result* r, size_t i,
                                                           mollified_patch_case* out);

MOLLIFIED_API mollified_status mollified_result_mesh(const mollified_result* r, mollified_mesh_summary* out);
/* Basis dump: sampled cell and number of rows. */
MOLLIFIED_API mollified_status mollified_result_basis(const mollified_result* r, int* cell, int* rows);

/* k-th derivative of the normalized kernel (degree ignored for quartic). */
MOLLIFIED_API mollified_status mollified_kernel_eval(mollified_kernel kind, int degree, double support, double x,
                                                     int k, double* out);
MOLLIFIED_API mollified_status mollified_kernel_moment(mollified_kernel kind, int degree, double support, int s,
                                                       double* out);

#ifdef __cplusplus
}
#endif

#endif
