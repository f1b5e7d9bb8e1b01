#ifndef LAMLAB_LAMLAB_H
#define LAMLAB_LAMLAB_H

/*
 * C interface to lamlab. Objects are opaque handles released with the
 * matching *_free function. Every call returns a lam_status; on failure the
 * message is available from lam_last_error() on the calling thread until the
 * next failing call. Strings returned through char** are owned by the caller
 * and released with lam_string_free().
 *
 * Matrices cross the boundary as row-major arrays of 2*n doubles.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LAMLAB_BUILDING_LIBRARY)
#    define LAM_API __declspec(dllexport)
#  else
#    define LAM_API __declspec(dllimport)
#  endif
#else
#  define LAM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lam_status {
  LAM_OK = 0,
  LAM_INVALID_ARGUMENT = 1,
  LAM_PARSE_ERROR = 2,
  LAM_DOMAIN_ERROR = 3,
  LAM_SINGULAR_B = 4,
  LAM_NOT_SQUARE = 5,
  LAM_INDEX_ERROR = 6,
  LAM_NOT_SUPPORTED = 7,
  LAM_CERTIFICATE_MISMATCH = 8,
  LAM_UNKNOWN_ID = 9,
  LAM_ZERO_FIELD = 10,
  LAM_SHAPE_ERROR = 11,
  LAM_IO_ERROR = 12,
  LAM_INTERNAL_ERROR = 100
} lam_status;

typedef enum lam_certify_status {
  LAM_CERTIFIED = 0,
  LAM_NOT_PRELAMINATE = 1,
  LAM_INDETERMINATE = 2
} lam_certify_status;

typedef struct lam_measure lam_measure;
typedef struct lam_tree lam_tree;
typedef struct lam_field lam_field;

LAM_API const char* lam_version(void);
LAM_API const char* lam_last_error(void);
LAM_API const char* lam_status_name(lam_status status);
LAM_API void lam_string_free(char* s);

/* Matrix operations. */
LAM_API lam_status lam_rank_le_one(const double* d, int n, double tol, int* result);
LAM_API lam_status lam_project_diag(const double* x, int n, double* out);
LAM_API lam_status lam_project_k(const double* x, int n, double k, double* out);
LAM_API lam_status lam_det2(const double* x, double* out);
/* x and out are 2x2; out may alias x. */
LAM_API lam_status lam_psi(const double* x, double delta_plus, double* out);

/* Measures. */
LAM_API lam_status lam_measure_create(int n, size_t count, const double* weights, const double* matrices,
                                      int renormalize, lam_measure** out);
LAM_API lam_status lam_measure_from_json(const char* json, lam_measure** out);
LAM_API lam_status lam_measure_to_json(const lam_measure* mu, char** json);
LAM_API void lam_measure_free(lam_measure* mu);
LAM_API lam_status lam_measure_size(const lam_measure* mu, size_t* count);
LAM_API lam_status lam_measure_cols(const lam_measure* mu, int* n);
LAM_API lam_status lam_measure_atom(const lam_measure* mu, size_t index, double* weight, double* matrix);
LAM_API lam_status lam_measure_barycenter(const lam_measure* mu, double* out);
LAM_API lam_status lam_polyconvexity_defect(const lam_measure* mu, double* out);
/* fn is a builtin id or "user:<path>". */
LAM_API lam_status lam_jensen_defect(const char* fn, const lam_measure* mu, double* out);
LAM_API lam_status lam_dual_measure(const lam_measure* mu, double delta_plus, lam_measure** out);

/* Splitting trees. */
LAM_API lam_status lam_tree_from_json(const char* json, lam_tree** out);
LAM_API lam_status lam_tree_to_json(const lam_tree* tree, char** json);
LAM_API void lam_tree_free(lam_tree* tree);
LAM_API lam_status lam_tree_verify(const lam_tree* tree, double tol, int* result);
LAM_API lam_status lam_tree_leaf_count(const lam_tree* tree, size_t* count);
LAM_API lam_status lam_tree_measure(const lam_tree* tree, lam_measure** out);
/* *tree is set only when *verdict is LAM_CERTIFIED; tree may be NULL. */
LAM_API lam_status lam_certify(const lam_measure* mu, int max_order, double rank_tol,
                               lam_certify_status* verdict, lam_tree** tree);
LAM_API lam_status lam_lift_tri(const lam_measure* mu, const lam_tree* proj_cert, lam_tree** out);
/* constraint is "full", "tri" or "diag". */
LAM_API lam_status lam_random_prelaminate(uint64_t seed, int order, const char* constraint, int n,
                                          const double* root, double scale, lam_tree** out);

/* Test functions. */
LAM_API lam_status lam_function_eval(const char* fn, int n, const double* x, double* out);
LAM_API lam_status lam_rc_check(const char* fn, int n, size_t samples, uint64_t seed, double box,
                                double* worst_defect, int* falsified);
/* field_json: {"n","grid","modes"}; x0 has 2*n entries. */
LAM_API lam_status lam_qc_defect(const char* fn, const double* x0, const char* field_json, double* out);

/* Grid fields. Axes are zero based; eps bit d is the flag of axis d. */
LAM_API lam_status lam_field_create(int n, int level, const double* values, lam_field** out);
LAM_API lam_status lam_field_from_json(const char* json, lam_field** out);
LAM_API void lam_field_free(lam_field* u);
LAM_API lam_status lam_field_size(const lam_field* u, size_t* count);
LAM_API lam_status lam_field_values(const lam_field* u, double* out);
LAM_API lam_status lam_field_riesz(const lam_field* u, int axis, lam_field** out);
LAM_API lam_status lam_interpolatory_ratio(const lam_field* u, unsigned eps, int axis, int padding, double* out);

/*
 * Runs a subcommand with a JSON config object (keys as the CLI flags).
 * Returns LAM_OK whenever a report was produced; *exit_status carries the
 * 0 / 1 / 2 verdict and *report the formatted report.
 */
LAM_API lam_status lam_run(const char* subcommand, const char* config_json, char** report, int* exit_status);
LAM_API void lam_request_interrupt(void);
LAM_API void lam_clear_interrupt(void);

#ifdef __cplusplus
}
#endif

#endif
