#ifndef DRP_DRP_H
#define DRP_DRP_H

/* C interface to the dual random projection library.
 *
 * Every function returns a drp_status. On failure the message of the most
 * recent error on the calling thread is available from drp_last_error().
 * Matrices cross the boundary as column-major double arrays. Strings
 * returned through char** are owned by the caller and released with
 * drp_string_free(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DRP_API __declspec(dllexport)
#else
#define DRP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum drp_status {
  DRP_OK = 0,
  DRP_ERR_INVALID_ARGUMENT = 1,
  DRP_ERR_DIMENSION = 2,
  DRP_ERR_DOMAIN = 3,
  DRP_ERR_NO_CONVERGENCE = 4,
  DRP_ERR_DECOMPOSITION = 5,
  DRP_ERR_IO = 6,
  DRP_ERR_CONFIG = 7,
  /* The experiment ran but every trial failed; the report is still returned. */
  DRP_ERR_ALL_TRIALS_FAILED = 8,
  DRP_ERR_INTERNAL = 9
} drp_status;

typedef enum drp_label_rule { DRP_LABELS_SIGN_OF_PLANT = 0, DRP_LABELS_RANDOM = 1 } drp_label_rule;

typedef struct drp_dataset drp_dataset;
typedef struct drp_sketch drp_sketch;

typedef struct drp_solver_options {
  double tolerance;       /* gradient-norm target, default 1e-10 */
  long max_iterations;    /* default 100000 */
} drp_solver_options;

DRP_API const char* drp_version(void);
DRP_API const char* drp_last_error(void);
DRP_API const char* drp_status_name(drp_status status);
DRP_API void drp_string_free(char* s);
DRP_API drp_solver_options drp_solver_defaults(void);

/* Datasets */
DRP_API drp_status drp_dataset_low_rank(long d, long n, long r, drp_label_rule rule, uint64_t seed,
                                        drp_dataset** out);
DRP_API drp_status drp_dataset_decaying(long d, long n, double decay, double leading,
                                        drp_label_rule rule, long plant_rank, uint64_t seed,
                                        drp_dataset** out);
DRP_API drp_status drp_dataset_from_arrays(const double* features, const double* labels, long d,
                                           long n, drp_dataset** out);
DRP_API drp_status drp_dataset_load_csv(const char* path, drp_dataset** out);
DRP_API drp_status drp_dataset_save_csv(const drp_dataset* data, const char* path);
DRP_API drp_status drp_dataset_shape(const drp_dataset* data, long* d, long* n);
/* Copies features (d*n, column-major) and labels (n) into caller buffers; either may be NULL. */
DRP_API drp_status drp_dataset_copy(const drp_dataset* data, double* features, double* labels);
DRP_API void drp_dataset_free(drp_dataset* data);

/* Sketches */
DRP_API drp_status drp_sketch_create(const drp_dataset* data, long m, uint64_t seed,
                                     drp_sketch** out);
/* Injected d x m projection matrix. */
DRP_API drp_status drp_sketch_from_matrix(const drp_dataset* data, const double* r, long m,
                                          drp_sketch** out);
DRP_API drp_status drp_sketch_save(const drp_sketch* sketch, const char* path);
DRP_API drp_status drp_sketch_load(const drp_dataset* data, const char* path, drp_sketch** out);
DRP_API drp_status drp_sketch_dim(const drp_sketch* sketch, long* m);
DRP_API void drp_sketch_free(drp_sketch* sketch);

/* Solvers and recovery. Results are JSON documents. */
DRP_API drp_status drp_solve(const drp_dataset* data, const char* loss, double lambda,
                             const drp_solver_options* options, char** json_out);
/* method: "naive", "drp" or "ridge-closed". With with_reference != 0 the
 * exact solution is computed and the relative error reported against the
 * bound eps / (1 - eps). */
DRP_API drp_status drp_recover(const drp_dataset* data, const drp_sketch* sketch, const char* loss,
                               const char* method, double lambda, const drp_solver_options* options,
                               int with_reference, double eps, char** json_out);
DRP_API drp_status drp_iterate(const drp_dataset* data, const drp_sketch* sketch, const char* loss,
                               double lambda, int iterations, const drp_solver_options* options,
                               int with_reference, double eps, char** json_out);

/* Concentration */
DRP_API drp_status drp_sample_size_bound(long r, double eps, double delta, double c, long* out);
DRP_API drp_status drp_full_rank_sample_bound(const double* singular_values, long count,
                                              double lambda, double gamma, double eps, double delta,
                                              long d, double c, long* out);
DRP_API drp_status drp_spectral_deviation(long r, long m, uint64_t seed, double* out);

/* Experiments. format is "json", "csv" or NULL (use the config's format).
 * When the config names an output file the report is also written there. */
DRP_API drp_status drp_run_experiment(const char* config_text, const char* format, char** report_out);

#ifdef __cplusplus
}
#endif

#endif
