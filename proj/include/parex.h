/* C API for the parex parameter-exclusion engine.
 *
 * All functions are thread-compatible: distinct handles may be used from
 * distinct threads. Errors are reported through status codes; the message for
 * the most recent failure on the calling thread is available via
 * parex_last_error().
 */
#ifndef PAREX_H
#define PAREX_H

#ifdef __cplusplus
extern "C" {
#endif

#define PAREX_OK 0
#define PAREX_ERR_CONFIG 1
#define PAREX_ERR_CHECK_FAILED 2
#define PAREX_ERR_SATURATED 3
#define PAREX_ERR_RUNTIME 4

typedef int parex_status;
typedef struct parex_config parex_config;  /* opaque */
typedef struct parex_family parex_family;  /* opaque */

const char* parex_version(void);
const char* parex_last_error(void);

/* configuration ---------------------------------------------------------- */
parex_config* parex_config_default(void);
parex_config* parex_config_preset(const char* name);
parex_config* parex_config_load(const char* path);
parex_config* parex_config_parse(const char* text);
void parex_config_free(parex_config* cfg);

/* dotted section.key, decimal value strings, e.g. ("conditions.alpha", "2e-5") */
parex_status parex_config_set(parex_config* cfg, const char* key, const char* value);
/* returns a pointer owned by the config, valid until the next call on it */
const char* parex_config_fingerprint(parex_config* cfg);

/* batch commands; each writes its artifacts into out_dir ------------------ */
parex_status parex_run_ce_check(const parex_config* cfg, const char* out_dir);
parex_status parex_run_recurrence(const parex_config* cfg, const char* out_dir);
parex_status parex_run_exclusion(const parex_config* cfg, const char* out_dir);
parex_status parex_run_density_scan(const parex_config* cfg, const char* out_dir);
parex_status parex_run_lemma_probe(const parex_config* cfg, const char* lemma_id,
                                   const char* out_dir);
parex_status parex_run_startup_scan(const parex_config* cfg, const char* out_dir);

/* direct evaluation ------------------------------------------------------- */
parex_family* parex_family_create(const parex_config* cfg);
void parex_family_free(parex_family* fam);

/* xi_{n,l}(a); out_chart is 0 for the finite chart, 1 for the reciprocal one */
parex_status parex_family_xi(const parex_family* fam, double a_re, double a_im, int l, long n,
                             double* out_re, double* out_im, int* out_chart);

/* verdict: 0 hyperbolic, 1 undetermined, 2 numeric failure. For hyperbolic
 * verdicts the first detected cycle's period and multiplier are returned. */
parex_status parex_classify_parameter(const parex_family* fam, double a_re, double a_im,
                                      long horizon, int max_period, int* out_verdict,
                                      int* out_period, double* out_mult_re, double* out_mult_im);

#ifdef __cplusplus
}
#endif

#endif /* PAREX_H */
