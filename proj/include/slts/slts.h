/* C interface to the Sturm-Liouville time-scale solver. */
#ifndef SLTS_H
#define SLTS_H

#include <stddef.h>
#include <stdint.h>

#if defined(SLTS_BUILDING)
#define SLTS_API __attribute__((visibility("default")))
#else
#define SLTS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Return codes; they double as CLI exit codes. */
enum slts_status {
    SLTS_OK = 0,
    SLTS_ERR_INPUT = 2,       /* schema, file or argument error */
    SLTS_ERR_NUMERIC = 3,     /* integration failure, pole, failed criterion */
    SLTS_ERR_UNSUPPORTED = 4, /* e.g. eigenvalues of a complex potential */
    SLTS_ERR_CONVERGENCE = 5  /* inverse solver did not converge or was flagged */
};

typedef struct slts_problem slts_problem;
typedef struct slts_model slts_model;

/* Message of the last failure on this thread ("" if none). */
SLTS_API const char* slts_last_error(void);
SLTS_API void slts_string_free(char* s);

/* Problem files (YAML). Relative data paths resolve against the file's directory. */
SLTS_API int slts_problem_load(const char* path, slts_problem** out);
SLTS_API int slts_problem_parse(const char* text, const char* base_dir, slts_problem** out);
/* Single segment [0, 1], zero potential, all defaults. */
SLTS_API int slts_problem_default(slts_problem** out);
SLTS_API void slts_problem_free(slts_problem* p);

/* Overrides: 0 threads selects machine parallelism; tol sets the integrator rtol. */
SLTS_API int slts_problem_set_threads(slts_problem* p, unsigned threads);
SLTS_API int slts_problem_set_tol(slts_problem* p, double tol);
SLTS_API int slts_problem_set_seed(slts_problem* p, uint64_t seed);

/* Fully resolved configuration (YAML); free with slts_string_free. */
SLTS_API int slts_problem_config(const slts_problem* p, char** yaml);
/* Validates inputs for `command` and describes the work without computing. */
SLTS_API int slts_problem_plan(const slts_problem* p, const char* command, const char* out_dir, char** text);

/* Subcommands; outputs go to out_dir (created if needed).
   forward:  forward.csv
   spectrum: spectrum.csv
   inverse:  result.json, potential.csv (written even when SLTS_ERR_CONVERGENCE is returned) */
SLTS_API int slts_run_forward(const slts_problem* p, const char* out_dir);
SLTS_API int slts_run_spectrum(const slts_problem* p, const char* out_dir);
SLTS_API int slts_run_inverse(const slts_problem* p, const char* out_dir);
/* Acceptance table, one line per criterion; *failed counts FAIL lines.
   Returns SLTS_ERR_NUMERIC when any criterion fails. */
SLTS_API int slts_run_verify(const slts_problem* p, char** table, int* failed);

/* Direct evaluation. segments holds n_segments [a, b] pairs; coeffs holds
   n_segments * n_coeffs Chebyshev coefficients per segment (imaginary parts
   optional, NULL for a real potential). */
SLTS_API int slts_model_create(const double* segments, size_t n_segments, const double* coeffs_re,
                               const double* coeffs_im, size_t n_coeffs, slts_model** out);
SLTS_API void slts_model_free(slts_model* m);
/* Delta_j(lambda), j = 0 or 1. */
SLTS_API int slts_char_delta(const slts_model* m, double lambda_re, double lambda_im, int j, double* out_re,
                             double* out_im);
/* Weyl function M(lambda); SLTS_ERR_NUMERIC at a pole. */
SLTS_API int slts_weyl(const slts_model* m, double lambda_re, double lambda_im, double* out_re, double* out_im);

#ifdef __cplusplus
}
#endif

#endif /* SLTS_H */
