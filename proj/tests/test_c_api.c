/* Exercises the shared library through its C header only. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "drp/drp.h"

static int failures = 0;

#define CHECK(cond)                                              \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                \
    }                                                            \
  } while (0)

static void test_dataset(void) {
  drp_dataset* data = NULL;
  long d = 0, n = 0;
  CHECK(drp_dataset_low_rank(30, 10, 3, DRP_LABELS_SIGN_OF_PLANT, 1, &data) == DRP_OK);
  CHECK(drp_dataset_shape(data, &d, &n) == DRP_OK);
  CHECK(d == 30 && n == 10);
  double labels[10];
  CHECK(drp_dataset_copy(data, NULL, labels) == DRP_OK);
  for (int i = 0; i < 10; ++i) CHECK(labels[i] == 1.0 || labels[i] == -1.0);
  drp_dataset_free(data);

  CHECK(drp_dataset_low_rank(30, 10, 40, DRP_LABELS_RANDOM, 1, &data) == DRP_ERR_INVALID_ARGUMENT);
  CHECK(strlen(drp_last_error()) > 0);
  CHECK(drp_dataset_load_csv("/nonexistent/file.csv", &data) == DRP_ERR_IO);
  drp_dataset_free(NULL);
}

static void test_recover(void) {
  const double x[6] = {1, 0, 0, 1, 1, 1};
  const double y[3] = {1, -1, 1};
  drp_dataset* data = NULL;
  CHECK(drp_dataset_from_arrays(x, y, 2, 3, &data) == DRP_OK);

  /* R = sqrt(2) I makes the sketch lossless. */
  const double r[4] = {sqrt(2.0), 0, 0, sqrt(2.0)};
  drp_sketch* sketch = NULL;
  CHECK(drp_sketch_from_matrix(data, r, 2, &sketch) == DRP_OK);
  long m = 0;
  CHECK(drp_sketch_dim(sketch, &m) == DRP_OK && m == 2);

  drp_solver_options opts = drp_solver_defaults();
  CHECK(opts.tolerance == 1e-10 && opts.max_iterations == 100000);
  char* out = NULL;
  CHECK(drp_recover(data, sketch, "logistic", "drp", 1.0, &opts, 1, 0.5, &out) == DRP_OK);
  CHECK(out && strstr(out, "\"rel_error\""));
  drp_string_free(out);

  out = NULL;
  CHECK(drp_recover(data, sketch, "square", "bogus", 1.0, &opts, 1, 0.5, &out) ==
        DRP_ERR_INVALID_ARGUMENT);
  CHECK(drp_recover(data, sketch, "hinge", "drp", 1.0, &opts, 1, 0.5, &out) != DRP_OK);
  CHECK(drp_solve(data, "square", -1.0, &opts, &out) == DRP_ERR_INVALID_ARGUMENT);

  CHECK(drp_iterate(data, sketch, "square", 1.0, 2, &opts, 1, 0.5, &out) == DRP_OK);
  CHECK(out && strstr(out, "\"trace\""));
  drp_string_free(out);

  drp_sketch_free(sketch);
  drp_dataset_free(data);
}

static void test_bounds(void) {
  long m = 0;
  CHECK(drp_sample_size_bound(5, 0.5, 0.1, 0.25, &m) == DRP_OK && m == 443);
  CHECK(drp_sample_size_bound(5, 0.0, 0.1, 0.25, &m) == DRP_ERR_INVALID_ARGUMENT);
  const double sigma[1] = {1.0};
  CHECK(drp_full_rank_sample_bound(sigma, 1, 1.0, 1.0, 1.0, 2.0 / exp(1.0), 1, 1.0, &m) == DRP_OK);
  CHECK(m == 1);
  double dev = -1.0;
  CHECK(drp_spectral_deviation(3, 2000, 4, &dev) == DRP_OK && dev >= 0.0 && dev < 0.2);
}

static void test_experiment(void) {
  char* report = NULL;
  CHECK(drp_run_experiment("experiment = bounds\nrank = 5\n", "csv", &report) == DRP_OK);
  CHECK(report && strncmp(report, "schema,", 7) == 0);
  drp_string_free(report);

  report = NULL;
  CHECK(drp_run_experiment("", NULL, &report) == DRP_ERR_CONFIG);
  CHECK(strstr(drp_last_error(), "experiment") != NULL);
  drp_string_free(report);

  report = NULL;
  CHECK(drp_run_experiment("experiment = recover\nd = 60\nn = 20\nrank = 3\nsketch_dim = 10\n"
                           "loss = logistic\nmax_iters = 1\ntol = 1e-14\n",
                           NULL, &report) == DRP_ERR_ALL_TRIALS_FAILED);
  CHECK(report != NULL);
  drp_string_free(report);
  CHECK(strcmp(drp_status_name(DRP_ERR_IO), "") != 0);
}

int main(void) {
  test_dataset();
  test_recover();
  test_bounds();
  test_experiment();
  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("c api: all checks passed (%s)\n", drp_version());
  return 0;
}
