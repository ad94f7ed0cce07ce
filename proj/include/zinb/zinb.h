#ifndef ZINB_H
#define ZINB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ZINB_API __declspec(dllexport)
#else
#define ZINB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes. */
typedef enum zinb_status {
    ZINB_OK = 0,
    ZINB_E_USAGE = 1,
    ZINB_E_DATA = 2,
    ZINB_W_CONVERGENCE = 3,
    ZINB_E_NUMERICAL = 4
} zinb_status;

typedef struct zinb_config zinb_config;
typedef struct zinb_dataset zinb_dataset;
typedef struct zinb_fit zinb_fit;

ZINB_API const char* zinb_version(void);

/* Message and error class name of the last failure on this thread. */
ZINB_API const char* zinb_last_error(void);
ZINB_API const char* zinb_last_error_kind(void);

/* command: "fit", "simulate", "evaluate" or "sim-study". */
ZINB_API zinb_status zinb_config_create(const char* command, zinb_config** out);
ZINB_API void zinb_config_destroy(zinb_config* config);
/* Flat `key = value` file; later zinb_config_set calls override it. */
ZINB_API zinb_status zinb_config_load_file(zinb_config* config, const char* path);
ZINB_API zinb_status zinb_config_set(zinb_config* config, const char* key, const char* value);
/* Copies the current value into buf (always NUL-terminated); *needed gets the full length. */
ZINB_API zinb_status zinb_config_get(const zinb_config* config, const char* key, char* buf, size_t buf_len,
                                     size_t* needed);

/* Keys accepted by a command, for building front ends. */
ZINB_API size_t zinb_config_key_count(const char* command);
ZINB_API const char* zinb_config_key_name(const char* command, size_t index);
ZINB_API const char* zinb_config_key_default(const char* command, size_t index);
ZINB_API const char* zinb_config_key_help(const char* command, size_t index);
ZINB_API int zinb_config_key_is_switch(const char* command, size_t index);

/* Runs the configured command, writing its output files. */
ZINB_API zinb_status zinb_run(const zinb_config* config);

/* counts: n x p row-major; covariates: n x r row-major; labels: n values in 1..K.
   Ids may be NULL, in which case S1.., F1.., X1.. are used. */
ZINB_API zinb_status zinb_dataset_create(size_t n, size_t p, size_t r, const int64_t* counts,
                                         const double* covariates, const int* labels,
                                         const char* const* sample_ids, const char* const* feature_ids,
                                         const char* const* covariate_ids, zinb_dataset** out);
ZINB_API zinb_status zinb_dataset_load(const char* counts_path, const char* covariates_path,
                                       const char* groups_path, zinb_dataset** out);
ZINB_API void zinb_dataset_destroy(zinb_dataset* dataset);
ZINB_API size_t zinb_dataset_samples(const zinb_dataset* dataset);
ZINB_API size_t zinb_dataset_features(const zinb_dataset* dataset);
ZINB_API size_t zinb_dataset_covariates(const zinb_dataset* dataset);

/* Fits with the model settings of a "fit" config (input paths are ignored).
   Returns ZINB_W_CONVERGENCE with a valid *out when chains disagree. */
ZINB_API zinb_status zinb_fit_run(const zinb_dataset* dataset, const zinb_config* config, zinb_fit** out);
ZINB_API void zinb_fit_destroy(zinb_fit* fit);
/* Features kept by the abundance filter. */
ZINB_API size_t zinb_fit_features(const zinb_fit* fit);
ZINB_API size_t zinb_fit_covariates(const zinb_fit* fit);
/* Input column index of kept feature j. */
ZINB_API zinb_status zinb_fit_feature_index(const zinb_fit* fit, size_t* out, size_t len);
ZINB_API zinb_status zinb_fit_ppi_gamma(const zinb_fit* fit, double* out, size_t len);
ZINB_API zinb_status zinb_fit_selected_gamma(const zinb_fit* fit, uint8_t* out, size_t len);
/* r x p, row-major by covariate. */
ZINB_API zinb_status zinb_fit_ppi_delta(const zinb_fit* fit, double* out, size_t len);
ZINB_API zinb_status zinb_fit_selected_delta(const zinb_fit* fit, uint8_t* out, size_t len);
ZINB_API zinb_status zinb_fit_thresholds(const zinb_fit* fit, double* gamma, double* delta);
ZINB_API int zinb_fit_converged(const zinb_fit* fit);
ZINB_API zinb_status zinb_fit_write(const zinb_fit* fit, const zinb_config* config, const char* directory);

/* Bayesian FDR selection over m PPIs. */
ZINB_API zinb_status zinb_bayesian_fdr(const double* ppi, size_t m, double target, uint8_t* selected,
                                       double* threshold);
ZINB_API zinb_status zinb_roc_auc(const double* scores, const uint8_t* truth, size_t m, double* out);

#ifdef __cplusplus
}
#endif

#endif
