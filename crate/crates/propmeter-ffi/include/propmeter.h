#ifndef PROPMETER_H
#define PROPMETER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every FFI entry point.
 */
typedef enum PropStatus {
  PropStatus_Ok = 0,
  PropStatus_NullArgument = 1,
  PropStatus_InvalidUtf8 = 2,
  PropStatus_ParseError = 3,
  PropStatus_InvalidArgument = 4,
  PropStatus_Failed = 5,
} PropStatus;

/**
 * Voting rules, numbered for the C ABI.
 */
typedef enum PropRule {
  PropRule_ScottishStv = 0,
  PropRule_MeekStv = 1,
  PropRule_Ear = 2,
  PropRule_Sntv = 3,
  PropRule_SeqRcv = 4,
} PropRule;

/**
 * Proportionality measures, numbered for the C ABI.
 */
typedef enum PropMeasure {
  PropMeasure_Psc = 0,
  PropMeasure_EjrPlus = 1,
  PropMeasure_LocalStability = 2,
  PropMeasure_Priceability = 3,
} PropMeasure;

/**
 * Opaque election handle.
 */
typedef struct PropElection PropElection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the last error message for this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *propmeter_last_error(void);

/**
 * Parses BLT text into an election handle.
 *
 * # Safety
 * `text` must be a valid NUL-terminated C string and `out` a valid pointer.
 */
enum PropStatus propmeter_election_parse_blt(const char *text, struct PropElection **out);

/**
 * Frees an election handle. A null handle is a no-op.
 *
 * # Safety
 * `handle` must be a pointer returned by this library and not yet freed.
 */
void propmeter_election_free(struct PropElection *handle);

/**
 * Writes candidate count, committee size, and voter count.
 *
 * # Safety
 * All pointers must be valid; `handle` must be a live election handle.
 */
enum PropStatus propmeter_election_info(const struct PropElection *handle,
                                        uintptr_t *candidates,
                                        uintptr_t *seats,
                                        uint64_t *voters);

/**
 * Runs a voting rule with lexicographic tie-breaking and writes the winning
 * committee (1-based candidate indices, ascending) into `committee`, which
 * must hold at least `seats` entries.
 *
 * # Safety
 * `handle` must be live and `committee` must point to `seats` writable
 * elements.
 */
enum PropStatus propmeter_rule_committee(const struct PropElection *handle,
                                         enum PropRule rule,
                                         uintptr_t *committee);

/**
 * Computes one measure's alpha value for a committee of `len` candidate
 * indices. Writes the value as a double plus a fraction; `*exact` reports
 * whether the fraction is exact (priceability may fall back to a float
 * solve on large instances).
 *
 * # Safety
 * `handle` must be live; `committee` must point to `len` readable entries;
 * the out-pointers must be valid.
 */
enum PropStatus propmeter_measure_alpha(const struct PropElection *handle,
                                        const uintptr_t *committee,
                                        uintptr_t len,
                                        enum PropMeasure measure,
                                        double *alpha,
                                        int64_t *numerator,
                                        int64_t *denominator,
                                        bool *exact);

/**
 * Computes the instance-optimal PSC value and its witness committee
 * (`seats` entries).
 *
 * # Safety
 * `handle` must be live; out-pointers must be valid; `witness` must point
 * to `seats` writable elements.
 */
enum PropStatus propmeter_optimal_psc(const struct PropElection *handle,
                                      double *alpha,
                                      int64_t *numerator,
                                      int64_t *denominator,
                                      uintptr_t *witness);

/**
 * Library version as a static string.
 */
const char *propmeter_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PROPMETER_H */
