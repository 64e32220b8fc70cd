#ifndef PCFI_H
#define PCFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Exact two-qubit value when `dim_a == 2`, heuristic search otherwise.
 */
#define PCFI_MODE_AUTO 0

#define PCFI_MODE_TWO_QUBIT 1

#define PCFI_MODE_SEARCH 2

typedef enum PcfiStatus {
  PCFI_STATUS_OK = 0,
  PCFI_STATUS_NULL_POINTER = 1,
  PCFI_STATUS_INVALID_UTF8 = 2,
  PCFI_STATUS_PARSE = 3,
  PCFI_STATUS_VALIDATION = 4,
  PCFI_STATUS_DOMAIN = 5,
  PCFI_STATUS_PANIC = 6,
} PcfiStatus;

/*
 Opaque phase-parametrized channel.
 */
typedef struct PcfiChannel PcfiChannel;

/*
 Opaque bipartite density matrix.
 */
typedef struct PcfiDensity PcfiDensity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses a density matrix from JSON with default tolerances.

 # Safety
 `json` must be a nul-terminated string; `out` must be writable.
 */
enum PcfiStatus pcfi_density_from_json(const char *json, struct PcfiDensity **out);

/*
 # Safety
 `p` must come from [`pcfi_density_from_json`] and not be freed twice.
 */
void pcfi_density_free(struct PcfiDensity *p);

/*
 Parses and validates a channel from JSON (1-based targets).

 # Safety
 `json` must be a nul-terminated string; `out` must be writable.
 */
enum PcfiStatus pcfi_channel_from_json(const char *json, struct PcfiChannel **out);

/*
 # Safety
 `p` must come from [`pcfi_channel_from_json`] and not be freed twice.
 */
void pcfi_channel_free(struct PcfiChannel *p);

/*
 Classical Fisher information of the post-selected outcomes at `eps0`.

 # Safety
 Handles must be live; `out` must be writable.
 */
enum PcfiStatus pcfi_classical_fi(const struct PcfiChannel *channel,
                                  const struct PcfiDensity *state,
                                  double eps0,
                                  double *out);

/*
 Quantum Fisher information of the reduced family produced by the channel.

 # Safety
 Handles must be live; `out` must be writable.
 */
enum PcfiStatus pcfi_qfi_family(const struct PcfiChannel *channel,
                                const struct PcfiDensity *state,
                                double eps0,
                                double *out);

/*
 Unitary-generator bound. `index == 0` searches every binary generator;
 `index >= 1` fixes the generator to the projector on that (1-based) level.

 # Safety
 `state` must be live; `out` must be writable.
 */
enum PcfiStatus pcfi_unitary_bound(const struct PcfiDensity *state, size_t index, double *out);

/*
 Coherence value. When `out_json` is non-null it receives the full result
 (value, mode, certificate channel) as JSON, to be released with
 [`pcfi_string_free`]. The search uses default settings with `seed`.

 # Safety
 `state` must be live; `out_value` must be writable; `out_json` may be null.
 */
enum PcfiStatus pcfi_coherence(const struct PcfiDensity *state,
                               uint32_t mode,
                               uint64_t seed,
                               double *out_value,
                               char **out_json);

/*
 Optimal success probability for a two-state ensemble given as JSON.

 # Safety
 `ensemble_json` must be a nul-terminated string; `out` must be writable.
 */
enum PcfiStatus pcfi_helstrom(const char *ensemble_json, double *out);

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next library call on the same thread.
 */
const char *pcfi_last_error(void);

/*
 # Safety
 `s` must be a string returned by this library, or null.
 */
void pcfi_string_free(char *s);

/*
 Library version, static storage.
 */
const char *pcfi_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PCFI_H */
