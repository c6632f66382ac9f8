#ifndef WBRELAY_H
#define WBRELAY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum WbrStatus {
  WBR_STATUS_OK = 0,
  WBR_STATUS_NULL_POINTER = 1,
  WBR_STATUS_INVALID_UTF8 = 2,
  WBR_STATUS_INVALID_CONFIG = 3,
  WBR_STATUS_INVALID_PARAMS = 4,
  WBR_STATUS_DOMAIN = 5,
  WBR_STATUS_PLANNING = 6,
  WBR_STATUS_RESOURCE = 7,
  WBR_STATUS_IO = 8,
  WBR_STATUS_SERIALIZATION = 9,
  WBR_STATUS_PANIC = 10,
} WbrStatus;

typedef enum WbrRegime {
  WBR_REGIME_DIRECT = 0,
  WBR_REGIME_RELAY_LIMITED_BY_SR = 1,
  WBR_REGIME_RELAY_LIMITED_BY_MA_CUT = 2,
} WbrRegime;

typedef enum WbrFormat {
  WBR_FORMAT_CSV = 0,
  WBR_FORMAT_JSONL = 1,
} WbrFormat;

/**
 * Opaque experiment configuration.
 */
typedef struct WbrConfig WbrConfig;

/**
 * Wideband rates in nats/s and the regime of a configuration.
 */
typedef struct WbrRates {
  double min_cut;
  double cutset_ub;
  double block_markov_lb;
  bool capacity_known;
  enum WbrRegime regime;
  double r1;
  double r2;
  double edge_blue;
  double edge_red;
  double edge_black;
  double edge_green;
  double flow_blue;
  double flow_red;
  double flow_black;
  double flow_green;
  double chernoff_rate_limit;
  double rho;
} WbrRates;

typedef struct WbrTails {
  double below;
  double above;
  double ln_above;
} WbrTails;

/**
 * Exact error probabilities and Chernoff bounds of a configuration.
 * `p_e11`, `p_e12` and `p_e2` are per-stage error events; the `p_tag_*`
 * fields partition `p_e_total` by first failing stage.
 */
typedef struct WbrExactReport {
  uint64_t m_r;
  uint64_t m_d;
  double p_e11;
  double p_e12;
  double p_e2;
  double p_bin_error;
  double p_e_total;
  double p_tag_e11;
  double p_tag_e12;
  double p_tag_e2;
  double bound_e11;
  double bound_e12;
  double bound_e2;
  double bound_total;
  bool bound_clamped;
} WbrExactReport;

/**
 * Monte Carlo batch summary.
 */
typedef struct WbrBatchSummary {
  uint64_t trials;
  uint64_t count_none;
  uint64_t count_e11;
  uint64_t count_e12;
  uint64_t count_e2;
  uint64_t relay_ok;
  uint64_t bin_ok_given_relay_ok;
  uint64_t bin_ok;
  double p_e_hat;
  double ci_low;
  double ci_high;
  double exact_p_e;
  double bound_total;
} WbrBatchSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a JSON configuration into a new handle stored in `*out`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum WbrStatus wbr_config_from_json(const char *json, struct WbrConfig **out);

/**
 * Loads a bundled preset (`example`, `fig3`, `n-scaling`, `oracle-grid`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum WbrStatus wbr_config_from_preset(const char *name, struct WbrConfig **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `config` must come from this library and not be used afterwards.
 */
void wbr_config_free(struct WbrConfig *config);

/**
 * Sets a dotted key, e.g. `params.a_sq`, to a JSON value or bare string.
 * The handle is unchanged on failure.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum WbrStatus wbr_config_set(struct WbrConfig *config, const char *key, const char *value);

/**
 * Serializes the configuration to JSON; free the result with
 * [`wbr_string_free`].
 *
 * # Safety
 * Pointers must be valid.
 */
enum WbrStatus wbr_config_to_json(const struct WbrConfig *config, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void wbr_string_free(char *s);

/**
 * Wideband rate bounds, regime and hyperedge capacities.
 *
 * # Safety
 * Pointers must be valid.
 */
enum WbrStatus wbr_rates(const struct WbrConfig *config, struct WbrRates *out);

/**
 * Tails of the mean of `n` i.i.d. exponentials of mean `sigma_sq` around
 * `threshold`.
 *
 * # Safety
 * `out` must be valid.
 */
enum WbrStatus wbr_exact_tails(uint32_t n, double threshold, double sigma_sq, struct WbrTails *out);

/**
 * Exact error probabilities and Chernoff bounds. The configuration needs a
 * codebook or a rate target.
 *
 * # Safety
 * Pointers must be valid.
 */
enum WbrStatus wbr_exact_error(const struct WbrConfig *config, struct WbrExactReport *out);

/**
 * Runs the configured Monte Carlo batch.
 *
 * # Safety
 * Pointers must be valid.
 */
enum WbrStatus wbr_run_batch(const struct WbrConfig *config, struct WbrBatchSummary *out);

/**
 * Runs the sweep section and writes the records to `path`. Point counts go
 * to `points_out` and `failed_out` when they are non-null.
 *
 * # Safety
 * `config` and `path` must be valid; the count pointers may be null.
 */
enum WbrStatus wbr_sweep_to_file(const struct WbrConfig *config,
                                 const char *path,
                                 enum WbrFormat format,
                                 size_t *points_out,
                                 size_t *failed_out);

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *wbr_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wbr_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WBRELAY_H */
