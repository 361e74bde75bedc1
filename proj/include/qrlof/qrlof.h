#ifndef QRLOF_QRLOF_H
#define QRLOF_QRLOF_H

/*
 * qrlof: lack-of-fit tests for linear quantile regression.
 *
 * C interface over opaque handles. Every fallible call returns a
 * qrlof_status; on failure qrlof_last_error() describes the problem for the
 * calling thread. Strings returned through char** are owned by the caller and
 * released with qrlof_string_free().
 */

#include <stddef.h>
#include <stdint.h>

#if defined(QRLOF_BUILDING_LIBRARY)
#define QRLOF_API __attribute__((visibility("default")))
#else
#define QRLOF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qrlof_status {
  QRLOF_OK = 0,
  QRLOF_ERR_INVALID_ARGUMENT = 1,
  QRLOF_ERR_DOMAIN = 2,
  QRLOF_ERR_SINGULAR_DESIGN = 3,
  QRLOF_ERR_UNDERDETERMINED = 4,
  QRLOF_ERR_PARSE = 5,
  QRLOF_ERR_IO = 6,
  QRLOF_ERR_INTERNAL = 7
} qrlof_status;

typedef enum qrlof_statistic {
  QRLOF_STATISTIC_PROJECTION = 0,
  QRLOF_STATISTIC_HZ = 1
} qrlof_statistic;

typedef enum qrlof_error_law {
  QRLOF_ERROR_DEFAULT = -1, /* the model's own error law */
  QRLOF_ERROR_NORMAL = 0,
  QRLOF_ERROR_LOGNORMAL = 1,
  QRLOF_ERROR_EXPONENTIAL = 2,
  QRLOF_ERROR_CHISQ = 3,
  QRLOF_ERROR_UNIFORM = 4,
  QRLOF_ERROR_MIXTURE = 5
} qrlof_error_law;

typedef enum qrlof_deviation {
  QRLOF_DEVIATION_QUADRATIC = 0,
  QRLOF_DEVIATION_SINE = 1,
  QRLOF_DEVIATION_EXP = 2,
  QRLOF_DEVIATION_LOG = 3
} qrlof_deviation;

typedef struct qrlof_dataset qrlof_dataset;
typedef struct qrlof_report qrlof_report;
typedef struct qrlof_table qrlof_table;

QRLOF_API const char* qrlof_version(void);
QRLOF_API const char* qrlof_status_string(qrlof_status status);
/* Message of the last failed call on this thread; "" if none. */
QRLOF_API const char* qrlof_last_error(void);
QRLOF_API void qrlof_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

/* response: column name, NULL or "" for the first column.
 * covariates: comma-separated names, NULL or "" for all other columns. */
QRLOF_API qrlof_status qrlof_dataset_from_csv(const char* path, const char* response,
                                              const char* covariates, char delimiter,
                                              qrlof_dataset** out);
/* covariates is row-major n x d. */
QRLOF_API qrlof_status qrlof_dataset_from_arrays(const double* covariates,
                                                 const double* response, size_t n,
                                                 size_t d, qrlof_dataset** out);
QRLOF_API void qrlof_dataset_free(qrlof_dataset* dataset);
QRLOF_API size_t qrlof_dataset_rows(const qrlof_dataset* dataset);
QRLOF_API size_t qrlof_dataset_cols(const qrlof_dataset* dataset);
/* Covariate name (index < cols); NULL when out of range. */
QRLOF_API const char* qrlof_dataset_column_name(const qrlof_dataset* dataset,
                                                size_t index);
/* Resolves "1,2,6", "x1,x2", "all" or "none" into 0-based covariate indices.
 * Writes at most capacity entries; *count receives the full count. */
QRLOF_API qrlof_status qrlof_dataset_resolve_columns(const qrlof_dataset* dataset,
                                                     const char* list, size_t* indices,
                                                     size_t capacity, size_t* count);

/* ---- tests ------------------------------------------------------------- */

typedef struct qrlof_test_options {
  double tau;
  size_t bootstrap; /* B */
  uint64_t seed;
  qrlof_statistic statistic;
  /* 0-based covariate indices; NULL/0 for the null set means intercept-only,
   * NULL/0 for the alternative set means all covariates. */
  const size_t* null_columns;
  size_t null_count;
  const size_t* alt_columns;
  size_t alt_count;
  int null_uses_all; /* nonzero: null set = all covariates (ignores null_columns) */
  int with_intercept;
  int smoothed_p_value;
  unsigned threads; /* 0 = hardware concurrency */
} qrlof_test_options;

/* tau 0.5, B 500, seed 0, projection, null = alternative = all covariates,
 * intercept on, plain p-value, 1 thread. */
QRLOF_API void qrlof_test_options_init(qrlof_test_options* options);

QRLOF_API qrlof_status qrlof_run_test(const qrlof_dataset* dataset,
                                      const qrlof_test_options* options,
                                      qrlof_report** out);
QRLOF_API void qrlof_report_free(qrlof_report* report);
QRLOF_API double qrlof_report_statistic(const qrlof_report* report);
QRLOF_API double qrlof_report_p_value(const qrlof_report* report);
QRLOF_API size_t qrlof_report_bootstrap_count(const qrlof_report* report);
/* Copies min(capacity, B) bootstrap statistics. */
QRLOF_API size_t qrlof_report_bootstrap_statistics(const qrlof_report* report,
                                                   double* out, size_t capacity);
QRLOF_API qrlof_status qrlof_report_to_json(const qrlof_report* report, char** out);
QRLOF_API qrlof_status qrlof_report_to_csv(const qrlof_report* report, char** out);
QRLOF_API qrlof_status qrlof_report_from_json(const char* json, qrlof_report** out);

/* ---- simulation -------------------------------------------------------- */

typedef struct qrlof_experiment_options {
  int model; /* 1..8 */
  double tau;
  double deviation_c;     /* model 6 */
  unsigned extra_dims_t;  /* model 8 */
  qrlof_deviation deviation; /* model 7 */
  qrlof_error_law error_law;
  double chisq_df; /* <= 0: model default */
  size_t n;
  size_t replications;
  size_t bootstrap;
  uint64_t seed;
  const double* alphas; /* NULL: 0.10, 0.05, 0.01 */
  size_t alpha_count;
  int run_projection;
  int run_hz;
  unsigned threads;
} qrlof_experiment_options;

/* Model 1, tau 0.5, n 100, 200 replications, B 200, seed 1, both tests. */
QRLOF_API void qrlof_experiment_options_init(qrlof_experiment_options* options);

QRLOF_API qrlof_status qrlof_run_experiment(const qrlof_experiment_options* options,
                                            qrlof_table** out);
/* One experiment per deviation size c (model 6). */
QRLOF_API qrlof_status qrlof_power_curve(const qrlof_experiment_options* options,
                                         const double* c_values, size_t count,
                                         qrlof_table** out);
QRLOF_API void qrlof_table_free(qrlof_table* table);
QRLOF_API size_t qrlof_table_rows(const qrlof_table* table);
/* Row fields; NaN / 0 for an out-of-range row. */
QRLOF_API double qrlof_table_proportion(const qrlof_table* table, size_t row);
QRLOF_API double qrlof_table_alpha(const qrlof_table* table, size_t row);
QRLOF_API qrlof_statistic qrlof_table_test(const qrlof_table* table, size_t row);
QRLOF_API size_t qrlof_table_rejections(const qrlof_table* table, size_t row);
/* Rejection table CSV, or the long power-curve CSV when the table came from
 * qrlof_power_curve. */
QRLOF_API qrlof_status qrlof_table_to_csv(const qrlof_table* table, char** out);
QRLOF_API qrlof_status qrlof_table_to_json(const qrlof_table* table, char** out);

/* ---- oracle ------------------------------------------------------------ */

typedef struct qrlof_oracle_result {
  double lof_statistic;
  double mc_statistic;
  double ratio;          /* mc / lof */
  double expected_ratio; /* limit of the ratio for this dimension */
  size_t draws;
  size_t dimension;
} qrlof_oracle_result;

/* Fits the full-design linear model at tau and compares the closed form
 * with a Monte Carlo sphere integral using `draws` random directions. */
QRLOF_API qrlof_status qrlof_oracle(const qrlof_dataset* dataset, double tau,
                                    size_t draws, uint64_t seed,
                                    qrlof_oracle_result* out);

#ifdef __cplusplus
}
#endif

#endif /* QRLOF_QRLOF_H */
