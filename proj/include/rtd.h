#ifndef RTD_H
#define RTD_H

/* C interface to the resource-theory distillation library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every call returns an rtd_status; on failure rtd_last_error() holds a
 * message for the calling thread. Reports are JSON documents (schema
 * "rtd-report/1"); infinite values appear as the string "inf". */

#include <stddef.h>
#include <stdint.h>

#if defined(RTD_BUILDING_SHARED)
#define RTD_API __attribute__((visibility("default")))
#else
#define RTD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rtd_status {
  RTD_OK = 0,
  RTD_ERR_INVALID = 1,
  RTD_ERR_PARSE = 2,
  RTD_ERR_IO = 3,
  RTD_ERR_DIMENSION = 4,
  RTD_ERR_NOT_HERMITIAN = 5,
  RTD_ERR_NOT_PSD = 6,
  RTD_ERR_BAD_FACTOR = 7,
  RTD_ERR_UNSUPPORTED = 8,
  RTD_ERR_DELTA_NEGATIVE = 9,
  RTD_ERR_HYPOTHESIS = 10,
  RTD_ERR_NOT_EXACT = 11,
  RTD_ERR_INTERNAL = 12
} rtd_status;

typedef enum rtd_theory { RTD_COHERENCE = 0, RTD_ENTANGLEMENT = 1, RTD_PURITY = 2 } rtd_theory;

typedef enum rtd_robustness_kind { RTD_ROBUSTNESS_GLOBAL = 0, RTD_ROBUSTNESS_FREE = 1, RTD_ROBUSTNESS_DELTA = 2 } rtd_robustness_kind;

typedef struct rtd_state rtd_state;
typedef struct rtd_report rtd_report;

/* Shared knobs. Fields not used by an operation are ignored. */
typedef struct rtd_options {
  double delta;
  double epsilon;
  uint64_t seed;
  /* Tolerance for certificates and the verify suites (default 1e-9). */
  double tol;
  /* gmin: 0 = plain G_min, 1 = smoothed at epsilon. */
  int smooth;
  /* gmin: 1 = pure ball, 0 = general ball. */
  int pure_ball;
  /* distill: build the map even when the sufficient condition fails. */
  int allow_unverified;
  /* distill: product-state sample size for entanglement certification. */
  size_t sample_size;
  /* sweep: add the R^delta column; 0 threads = hardware concurrency. */
  int robustness_column;
  size_t threads;
  /* verify */
  size_t dim_max;
  size_t trials;
} rtd_options;

RTD_API void rtd_options_default(rtd_options* opts);

RTD_API const char* rtd_version(void);
RTD_API const char* rtd_status_name(rtd_status status);
RTD_API const char* rtd_last_error(void);
RTD_API rtd_status rtd_theory_parse(const char* name, rtd_theory* out);

/* ---- states ---- */
RTD_API rtd_status rtd_state_load(const char* path, rtd_state** out);
RTD_API rtd_status rtd_state_from_json(const char* text, rtd_state** out);
/* Unit resource state of the theory on local dimension d, to the power copies. */
RTD_API rtd_status rtd_state_unit(rtd_theory theory, size_t d, size_t copies, rtd_state** out);
/* Caller frees *out with rtd_string_free. */
RTD_API rtd_status rtd_state_to_json(const rtd_state* state, char** out);
RTD_API size_t rtd_state_dim(const rtd_state* state);
RTD_API int rtd_state_is_pure(const rtd_state* state);
RTD_API void rtd_state_free(rtd_state* state);
RTD_API void rtd_string_free(char* s);

/* ---- operations (each allocates *out on RTD_OK) ---- */
RTD_API rtd_status rtd_gmin(rtd_theory theory, const rtd_state* rho, const rtd_options* opts, rtd_report** out);
RTD_API rtd_status rtd_robustness(rtd_theory theory, const rtd_state* rho, rtd_robustness_kind kind,
                                  const rtd_options* opts, rtd_report** out);
/* target may be NULL: the theory's unit state on d = 2. */
RTD_API rtd_status rtd_bound(rtd_theory theory, const rtd_state* rho, const rtd_state* target,
                             const rtd_options* opts, rtd_report** out);
/* On RTD_ERR_HYPOTHESIS *out still receives a report with "lhs" and "rhs". */
RTD_API rtd_status rtd_distill(rtd_theory theory, const rtd_state* rho, const rtd_state* target, size_t m,
                               const rtd_options* opts, rtd_report** out);
/* Succeeds whether or not the suites pass; read "passed" from the report. */
RTD_API rtd_status rtd_verify(const char* suite, const rtd_options* opts, rtd_report** out);
RTD_API rtd_status rtd_sweep(rtd_theory theory, const rtd_state* rho, const rtd_state* target, const double* deltas,
                             size_t n_deltas, const double* epsilons, size_t n_epsilons, const rtd_options* opts,
                             rtd_report** out);

/* ---- reports ----
 * Keys are top-level names ("value") or JSON pointers ("/certificate/verdict").
 * Returned strings are owned by the report. */
RTD_API rtd_status rtd_report_get_double(const rtd_report* report, const char* key, double* out);
RTD_API rtd_status rtd_report_get_int(const rtd_report* report, const char* key, int64_t* out);
RTD_API rtd_status rtd_report_get_bool(const rtd_report* report, const char* key, int* out);
RTD_API rtd_status rtd_report_get_string(const rtd_report* report, const char* key, const char** out);
RTD_API const char* rtd_report_to_json(const rtd_report* report);
RTD_API void rtd_report_free(rtd_report* report);

#ifdef __cplusplus
}
#endif

#endif
