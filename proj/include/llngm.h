/* llngm - Gibbs samplers for linear latent non-Gaussian models with GIG
 * variance mixtures: samplers, ergodicity diagnostics, and stochastic
 * gradient maximum likelihood.
 *
 * C interface of the shared library. All functions return llngm_status;
 * on failure, llngm_last_error() describes the problem (thread-local).
 * Strings returned through char** are heap-allocated and must be released
 * with llngm_string_free().
 */
#ifndef LLNGM_H
#define LLNGM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LLNGM_API __declspec(dllexport)
#else
#define LLNGM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum llngm_status {
  LLNGM_OK = 0,
  LLNGM_ERR_INVALID_ARGUMENT = 1, /* bad parameters / config */
  LLNGM_ERR_DOMAIN = 2,           /* outside a function's domain */
  LLNGM_ERR_DIVERGENT = 3,        /* requested quantity does not exist */
  LLNGM_ERR_RUNTIME = 4,          /* numeric or internal failure */
  LLNGM_ERR_IO = 5                /* file system problem */
} llngm_status;

LLNGM_API const char* llngm_version(void);
LLNGM_API const char* llngm_last_error(void);
LLNGM_API void llngm_string_free(char* s);

/* ---- special functions and the GIG family ---- */

LLNGM_API llngm_status llngm_bessel_k(double nu, double x, double* out);
LLNGM_API llngm_status llngm_log_bessel_k(double nu, double x, double* out);
LLNGM_API llngm_status llngm_gig_log_density(double p, double a, double b,
                                             double x, double* out);
/* E[V^r]; LLNGM_ERR_DIVERGENT when the moment does not exist. */
LLNGM_API llngm_status llngm_gig_moment(double p, double a, double b, double r,
                                        double* out);

typedef struct llngm_rng llngm_rng;
LLNGM_API llngm_rng* llngm_rng_create(uint64_t seed);
LLNGM_API void llngm_rng_free(llngm_rng* rng);
LLNGM_API llngm_status llngm_gig_sample(llngm_rng* rng, double p, double a,
                                        double b, double* out);
LLNGM_API llngm_status llngm_gig_sample_many(llngm_rng* rng, double p, double a,
                                             double b, size_t count,
                                             double* out);

/* ---- model handle and ergodicity reports ---- */

/* The model is described by the same flat key/value configuration text the
 * CLI uses ([model] section; see README). */
typedef struct llngm_model llngm_model;
LLNGM_API llngm_status llngm_model_create(const char* config_text,
                                          llngm_model** out);
LLNGM_API llngm_status llngm_model_create_from_file(const char* path,
                                                    llngm_model** out);
LLNGM_API void llngm_model_free(llngm_model* model);

/* Regime classification (trace-class / geometric ergodicity table row),
 * null-smallness report, and drift constants, all as JSON. */
LLNGM_API llngm_status llngm_regime_report(const llngm_model* model,
                                           char** json_out);
LLNGM_API llngm_status llngm_nullsmall_report(const llngm_model* model,
                                              char** json_out);
/* drift_case: 1, 2 or 3. */
LLNGM_API llngm_status llngm_drift_report(const llngm_model* model,
                                          int drift_case, char** json_out);

/* ---- experiment runners (config-driven; write CSV/JSON into out_dir) ---- */

LLNGM_API llngm_status llngm_run_sample(const char* config_text,
                                        const char* out_dir, char** json_out);
LLNGM_API llngm_status llngm_diagnose(const char* chain_dir, char** json_out);
LLNGM_API llngm_status llngm_run_s1(const char* config_text,
                                    const char* out_dir, char** json_out);
LLNGM_API llngm_status llngm_run_s2(const char* config_text,
                                    const char* out_dir, char** json_out);
LLNGM_API llngm_status llngm_run_estimate(const char* config_text,
                                          const char* out_dir, char** json_out);
LLNGM_API llngm_status llngm_gigcheck(uint64_t seed, char** json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LLNGM_H */
