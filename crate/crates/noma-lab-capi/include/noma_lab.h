/* C interface for the noma-lab secure massive NOMA library. */

#ifndef NOMA_LAB_H
#define NOMA_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every C entry point.
 */
typedef enum NomaStatus {
  NOMA_STATUS_OK = 0,
  /*
   A required pointer argument was null.
   */
  NOMA_STATUS_NULL_ARGUMENT = 1,
  /*
   A string argument was not valid UTF-8.
   */
  NOMA_STATUS_INVALID_UTF8 = 2,
  /*
   The scenario text did not parse.
   */
  NOMA_STATUS_PARSE_ERROR = 3,
  /*
   The scenario violates a structural invariant.
   */
  NOMA_STATUS_INVALID_CONFIG = 4,
  /*
   An output buffer is shorter than the user count.
   */
  NOMA_STATUS_BUFFER_TOO_SMALL = 5,
  /*
   The optimization admits no feasible power vector.
   */
  NOMA_STATUS_INFEASIBLE = 6,
  /*
   The max-min search is infeasible already at its initial target.
   */
  NOMA_STATUS_INFEASIBLE_AT_START = 7,
  /*
   An argument value is out of range.
   */
  NOMA_STATUS_INVALID_ARGUMENT = 8,
  /*
   An unexpected internal failure; details via `noma_last_error`.
   */
  NOMA_STATUS_INTERNAL_ERROR = 9,
} NomaStatus;

/*
 Opaque scenario handle.
 */
typedef struct NomaScenario NomaScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copy the last error message of this thread into `buffer` (NUL
 terminated, truncated to `len` bytes) and return the full length of the
 message, not counting the terminator. A zero return means no error has
 been recorded. `buffer` may be null to query the length alone.
 */
size_t noma_last_error(char *buffer, size_t len);

/*
 Parse scenario text into a handle. Returns null on failure; see
 `noma_last_error`.
 */
struct NomaScenario *noma_scenario_parse(const char *text);

/*
 Load a scenario file into a handle. Returns null on failure.
 */
struct NomaScenario *noma_scenario_load(const char *path);

/*
 The built-in default scenario.
 */
struct NomaScenario *noma_scenario_default(void);

/*
 Release a handle. Null is accepted and ignored.
 */
void noma_scenario_free(struct NomaScenario *scenario);

/*
 Number of users across all clusters; zero for a null handle.
 */
size_t noma_scenario_user_count(const struct NomaScenario *scenario);

/*
 Closed-form per-user rates in flat user order. Any of the three output
 arrays may be null to skip it; non-null arrays must hold at least `len`
 elements and `len` must be at least the user count.
 */
enum NomaStatus noma_analyze(const struct NomaScenario *scenario,
                             double *legit,
                             double *eve,
                             double *secrecy,
                             size_t len);

/*
 Monte Carlo per-user rate estimates (means and standard errors for the
 legitimate and eavesdropping channels), deterministic in `seed`. Output
 arrays may be null to skip; `trials` must be at least 100.
 */
enum NomaStatus noma_estimate_rates(const struct NomaScenario *scenario,
                                    size_t trials,
                                    uint64_t seed,
                                    double *user_mean,
                                    double *user_se,
                                    double *eve_mean,
                                    double *eve_se,
                                    size_t len);

/*
 Maximize the minimum user rate over the pilot powers under the
 eavesdropping cap `r_e` and per-user pilot cap `q_max`. On success
 `powers` receives the pilot powers (flat user order) and `r_o_out` the
 certified minimum-rate target.
 */
enum NomaStatus noma_optimize_max_min_pilot(const struct NomaScenario *scenario,
                                            double r_e,
                                            double q_max,
                                            double delta_o,
                                            double *powers,
                                            size_t len,
                                            double *r_o_out);

/*
 Minimize the total pilot power subject to the eavesdropping cap and the
 per-user rate floor. `total_out` receives the minimal total.
 */
enum NomaStatus noma_optimize_min_pilot(const struct NomaScenario *scenario,
                                        double r_e,
                                        double r_o,
                                        double q_max,
                                        double *powers,
                                        size_t len,
                                        double *total_out);

/*
 Maximize the minimum user rate over the transmit powers under the
 eavesdropping cap, total budget `p_tot`, and the nondecreasing
 in-cluster ordering.
 */
enum NomaStatus noma_optimize_max_min_tx(const struct NomaScenario *scenario,
                                         double r_e,
                                         double p_tot,
                                         double delta_o,
                                         double *powers,
                                         size_t len,
                                         double *r_o_out);

/*
 Minimize the total transmit power subject to the eavesdropping cap, the
 rate floor, the budget, and the in-cluster ordering.
 */
enum NomaStatus noma_optimize_min_tx(const struct NomaScenario *scenario,
                                     double r_e,
                                     double r_o,
                                     double p_tot,
                                     double *powers,
                                     size_t len,
                                     double *total_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOMA_LAB_H */
