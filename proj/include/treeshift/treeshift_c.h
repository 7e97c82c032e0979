#ifndef TREESHIFT_C_H
#define TREESHIFT_C_H

/* C interface to the treeshift library.
 *
 * A model is loaded once into an opaque handle. Every command takes an
 * options object as a JSON string (NULL or "" for defaults) and returns its
 * report as a JSON string and, where the command has one, a CSV table.
 * Returned strings are owned by the caller and released with ts_string_free.
 * On failure the status is nonzero and ts_last_error() describes it; the
 * message is per thread and stays valid until the next call on that thread. */

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define TS_API __declspec(dllexport)
#else
#define TS_API __attribute__((visibility("default")))
#endif

typedef struct ts_model ts_model_t;

typedef enum {
  TS_OK = 0,
  TS_ERR_INTERNAL = 1,
  TS_ERR_PARSE = 2,
  TS_ERR_VALIDATION = 3,
  TS_ERR_NUMERIC = 4,
  TS_ERR_RESOURCE = 5
} ts_status;

TS_API const char* ts_version(void);
TS_API const char* ts_last_error(void);
TS_API void ts_string_free(char* s);

TS_API int ts_model_from_json(const char* json, ts_model_t** out);
TS_API int ts_model_from_file(const char* path, ts_model_t** out);
TS_API void ts_model_free(ts_model_t* model);
TS_API int ts_model_size(const ts_model_t* model);

/* Structure report: (A0)/(A1) verdicts, a0, period, classes, reachability. */
TS_API int ts_analyze(const ts_model_t* model, const char* options, char** out_json);
/* Hausdorff dimension (or the general upper bound); CSV scan of the objective
 * over the simplex grid when options.scan is true. */
TS_API int ts_dimension(const ts_model_t* model, const char* options, char** out_json, char** out_csv);
/* Rate curve of the sample mean: CSV alpha,rate,argmax_mu,finite. */
TS_API int ts_rate(const ts_model_t* model, const char* options, char** out_json, char** out_csv);
/* LLN phase limits and the stationary bounds. */
TS_API int ts_lln(const ts_model_t* model, const char* options, char** out_json);
/* Monte Carlo LLN experiment; CSV of per-trial means. */
TS_API int ts_simulate(const ts_model_t* model, const char* options, char** out_json, char** out_csv);
/* Exact block counts, type classes and the exact law of the sample mean. */
TS_API int ts_oracle(const ts_model_t* model, const char* options, char** out_json, char** out_csv);
/* Block-count entropy sequence and h_top estimate. */
TS_API int ts_entropy(const ts_model_t* model, const char* options, char** out_json);
/* Optimal Markov measure at the dimension minimizer. */
TS_API int ts_measure(const ts_model_t* model, const char* options, char** out_json);

/* Scalar shortcut: dimension with default options. */
TS_API int ts_dimension_value(const ts_model_t* model, double* out);

#ifdef __cplusplus
}
#endif

#endif
