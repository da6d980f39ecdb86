#ifndef PSIFRAC_H
#define PSIFRAC_H

/* generated by cbindgen; do not edit by hand */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum PsifracStatus {
  PSIFRAC_STATUS_OK = 0,
  /**
   * null pointer, bad UTF-8, or an argument outside its range
   */
  PSIFRAC_STATUS_INVALID_ARGUMENT = 1,
  /**
   * config file missing, malformed, or failed validation
   */
  PSIFRAC_STATUS_CONFIG = 2,
  /**
   * iteration budget exhausted before the tolerance was met
   */
  PSIFRAC_STATUS_NO_CONVERGENCE = 3,
  /**
   * boundary system determinant below tolerance
   */
  PSIFRAC_STATUS_DEGENERATE = 4,
  PSIFRAC_STATUS_IO = 5,
  /**
   * any other failure (details unavailable across the ABI)
   */
  PSIFRAC_STATUS_INTERNAL = 6,
} PsifracStatus;

/**
 * Opaque solver result handle.
 */
typedef struct PsifracSolution PsifracSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *psifrac_version(void);

/**
 * Gamma function. Fails on the poles at 0, -1, -2, ...
 */
enum PsifracStatus psifrac_gamma(double x, double *out);

/**
 * Error function (total; never fails).
 */
double psifrac_erf(double x);

/**
 * Mittag-Leffler E_{alpha,beta}(z) by series summation.
 */
enum PsifracStatus psifrac_ml_eval(double alpha, double beta, double z, double *out);

/**
 * Solve the problem described by a TOML config file.
 *
 * On `Ok` and on `NoConvergence` a handle is stored in `out`; the partial
 * solution of a non-converged run is still inspectable. The caller owns
 * the handle and must release it with [`psifrac_solution_free`].
 */
enum PsifracStatus psifrac_solve_config(const char *config_path, struct PsifracSolution **out);

/**
 * Number of mesh nodes in a solution.
 */
uintptr_t psifrac_solution_len(const struct PsifracSolution *handle);

/**
 * Whether the solve met its tolerance.
 */
bool psifrac_solution_converged(const struct PsifracSolution *handle);

/**
 * Iterations performed.
 */
uintptr_t psifrac_solution_iterations(const struct PsifracSolution *handle);

/**
 * Read node i: time, solution value, and the derivative channel.
 */
enum PsifracStatus psifrac_solution_node(const struct PsifracSolution *handle,
                                         uintptr_t i,
                                         double *t,
                                         double *u,
                                         double *du);

/**
 * Max interior residual of the differential form.
 */
double psifrac_solution_residual(const struct PsifracSolution *handle);

/**
 * Release a solution handle. Null is a no-op.
 */
void psifrac_solution_free(struct PsifracSolution *handle);

/**
 * Solve a config and write the solution CSV in one call.
 */
enum PsifracStatus psifrac_solve_to_csv(const char *config_path, const char *csv_path);

/**
 * Evaluate the uniqueness and existence verdicts of a config.
 *
 * `uniqueness` and `existence` receive 1 for pass, 0 for fail.
 */
enum PsifracStatus psifrac_certify(const char *config_path,
                                   int32_t *uniqueness,
                                   int32_t *existence);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PSIFRAC_H */
