#ifndef STRIP_GUIDANCE_H
#define STRIP_GUIDANCE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SgMethod {
  SG_METHOD_LINEAR = 0,
  SG_METHOD_MIN_INTEGRAL = 1,
  SG_METHOD_MIN_MAX = 2,
} SgMethod;

// Status codes. The non-zero solver codes match the command-line exit codes.
typedef enum SgStatus {
  SG_STATUS_OK = 0,
  SG_STATUS_CONFIG = 2,
  SG_STATUS_NOT_CONVERGED = 3,
  SG_STATUS_KINEMATIC = 4,
  SG_STATUS_NULL_POINTER = 5,
  SG_STATUS_INVALID_ARGUMENT = 6,
  SG_STATUS_PANIC = 7,
} SgStatus;

// Opaque scenario handle.
typedef struct SgScenario SgScenario;

// Opaque solution handle.
typedef struct SgSolution SgSolution;

// Profile metrics of a solution.
typedef struct SgMetrics {
  // Integral of the squared rate, (deg/s)^2 s.
  double integral_rate_sq;
  // Peak rate, deg/s.
  double max_rate;
  // Terminal arc-angle error, rad.
  double terminal_error;
  // Normalized line-rate bound violation; NaN without bounds.
  double bound_violation;
  double min_f_ccd;
  double max_f_ccd;
  size_t iterations;
  bool converged;
} SgMetrics;

// One grid node of a solution profile.
typedef struct SgNode {
  double t;
  double s;
  double u;
  // Scalar-first unit quaternion, inertial to desired frame.
  double quaternion[4];
  // Inertial rate, rad/s.
  double omega[3];
  // Inertial acceleration, rad/s^2.
  double alpha[3];
  double f_ccd;
  double drift;
} SgNode;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the next
// call into this library on the same thread.
const char *sg_last_error(void);

// Parses a scenario from TOML text.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a valid pointer.
enum SgStatus sg_scenario_from_toml(const char *toml, struct SgScenario **out);

// Loads a scenario TOML file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum SgStatus sg_scenario_load(const char *path, struct SgScenario **out);

// # Safety
// `scenario` must come from this library and not be freed twice.
void sg_scenario_free(struct SgScenario *scenario);

// Number of grid nodes, 0 for a null handle.
//
// # Safety
// `scenario` must be null or a live handle.
size_t sg_scenario_nodes(const struct SgScenario *scenario);

// Solves one method. A solution that did not converge is still returned in
// `out`, with status `NotConverged`.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum SgStatus sg_solve(const struct SgScenario *scenario,
                       enum SgMethod method,
                       bool constrained,
                       struct SgSolution **out);

// # Safety
// `solution` must come from this library and not be freed twice.
void sg_solution_free(struct SgSolution *solution);

// # Safety
// `solution` must be a live handle and `out` a valid pointer.
enum SgStatus sg_solution_metrics(const struct SgSolution *solution, struct SgMetrics *out);

// Number of profile nodes, 0 for a null handle.
//
// # Safety
// `solution` must be null or a live handle.
size_t sg_solution_len(const struct SgSolution *solution);

// Copies the profile into `nodes`, which must hold `len` entries with
// `len >= sg_solution_len(solution)`.
//
// # Safety
// `solution` must be a live handle and `nodes` valid for `len` writes.
enum SgStatus sg_solution_profile(const struct SgSolution *solution,
                                  struct SgNode *nodes,
                                  size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STRIP_GUIDANCE_H */
