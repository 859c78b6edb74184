#ifndef FLICKER_BELL_H
#define FLICKER_BELL_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define FB_COLOR_RED 0

#define FB_COLOR_GREEN 1

#define FB_PARTICLE_PHOTON 0

#define FB_PARTICLE_SPIN_HALF 1

// Result code of every fallible call.
typedef enum FbStatus {
  FB_STATUS_OK = 0,
  FB_STATUS_NULL_POINTER = 1,
  FB_STATUS_INVALID_ARGUMENT = 2,
  FB_STATUS_RUNTIME = 3,
  FB_STATUS_PANIC = 4,
} FbStatus;

// Opaque exact probability table.
typedef struct FbOracle FbOracle;

// Opaque run configuration.
typedef struct FbRunConfig FbRunConfig;

// Opaque tally of a finished run, together with the config that produced it.
typedef struct FbTally FbTally;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *fb_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *fb_version(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be NULL or a pointer returned by a `*_report` call, not yet freed.
void fb_string_free(char *s);

// New run configuration with the default observer (bias 3/8), observer-
// mediated collapse, uniform settings and random instruction sets.
struct FbRunConfig *fb_run_config_new(uint64_t n_trials, uint64_t seed);

// # Safety
// `cfg` must be NULL or a handle from [`fb_run_config_new`], not yet freed.
void fb_run_config_free(struct FbRunConfig *cfg);

// Sets the bias probability to `num / den`.
//
// # Safety
// `cfg` must be a live handle.
enum FbStatus fb_run_config_set_bias(struct FbRunConfig *cfg, uint64_t num, uint64_t den);

// Sets the collapse mode from a token: `observer`, `objective-early` or
// `sf-delayed:<seconds>`.
//
// # Safety
// `cfg` must be a live handle and `token` a NUL-terminated string.
enum FbStatus fb_run_config_set_mode(struct FbRunConfig *cfg, const char *token);

// Sets the setting policy: `uniform`, `fixed:<l>,<r>` or
// `weighted:<w11>,...,<w33>`.
//
// # Safety
// `cfg` must be a live handle and `token` a NUL-terminated string.
enum FbStatus fb_run_config_set_settings(struct FbRunConfig *cfg, const char *token);

// Sets the instruction-set source: `random` or `fixed:<RGF-token>`.
//
// # Safety
// `cfg` must be a live handle and `token` a NUL-terminated string.
enum FbStatus fb_run_config_set_source(struct FbRunConfig *cfg, const char *token);

// Runs the experiment. `workers == 0` uses the internal thread pool;
// otherwise the trials are split over exactly `workers` threads. The
// tallies do not depend on the choice.
//
// # Safety
// `cfg` must be a live handle and `out` writable.
enum FbStatus fb_run_experiment(const struct FbRunConfig *cfg,
                                uint32_t workers,
                                struct FbTally **out);

// # Safety
// `tally` must be NULL or a handle from [`fb_run_experiment`], not yet freed.
void fb_tally_free(struct FbTally *tally);

// Total trials in the tally, 0 for NULL.
//
// # Safety
// `tally` must be NULL or a live handle.
uint64_t fb_tally_total(const struct FbTally *tally);

// Count of trials at settings `(left, right)` perceived as
// `(left_color, right_color)`.
//
// # Safety
// `tally` must be a live handle and `out` writable.
enum FbStatus fb_tally_count(const struct FbTally *tally,
                             uint8_t left,
                             uint8_t right,
                             uint8_t left_color,
                             uint8_t right_color,
                             uint64_t *out);

// Monte Carlo estimate of the same-colour sum over distinct setting pairs
// and its standard error.
//
// # Safety
// `tally` must be a live handle; `sum` and `std_err` writable.
enum FbStatus fb_tally_mermin_sum(const struct FbTally *tally, double *sum, double *std_err);

// Renders the run report (`format`: `text`, `csv`, `json`; NULL means
// text). Free the result with [`fb_string_free`].
//
// # Safety
// `tally` must be a live handle, `format` NULL or NUL-terminated, `out`
// writable.
enum FbStatus fb_tally_report(const struct FbTally *tally, const char *format, char **out);

// Builds the exact table for bias `num/den`, a mode token and a source
// token (`random` or `fixed:<RGF-token>`).
//
// # Safety
// `mode` and `source` must be NUL-terminated strings; `out` writable.
enum FbStatus fb_oracle_new(uint64_t bias_num,
                            uint64_t bias_den,
                            const char *mode,
                            const char *source,
                            struct FbOracle **out);

// # Safety
// `oracle` must be NULL or a handle from [`fb_oracle_new`], not yet freed.
void fb_oracle_free(struct FbOracle *oracle);

// Exact probability of `(left_color, right_color)` at settings
// `(left, right)`, as a reduced fraction.
//
// # Safety
// `oracle` must be a live handle; `num` and `den` writable.
enum FbStatus fb_oracle_probability(const struct FbOracle *oracle,
                                    uint8_t left,
                                    uint8_t right,
                                    uint8_t left_color,
                                    uint8_t right_color,
                                    int64_t *num,
                                    int64_t *den);

// Exact same-colour sum over distinct setting pairs.
//
// # Safety
// `oracle` must be a live handle; `num` and `den` writable.
enum FbStatus fb_oracle_mermin_sum(const struct FbOracle *oracle, int64_t *num, int64_t *den);

// Renders the oracle report. Free the result with [`fb_string_free`].
//
// # Safety
// `oracle` must be a live handle, `format` NULL or NUL-terminated, `out`
// writable.
enum FbStatus fb_oracle_report(const struct FbOracle *oracle, const char *format, char **out);

// Minimum of the same-colour sum over local deterministic strategies.
//
// # Safety
// `num` and `den` must be writable.
enum FbStatus fb_local_strategy_bound(int64_t *num, int64_t *den);

// Quantum same-colour probability for switch angles in degrees.
//
// # Safety
// `out` must be writable.
enum FbStatus fb_qm_same_color_probability(uint32_t kind,
                                           double angle_a,
                                           double angle_b,
                                           double *out);

// Collapse time in seconds for `n_particles` of relative mass `mass_ratio`.
//
// # Safety
// `out` must be writable.
enum FbStatus fb_csl_collapse_time(double n_particles, double mass_ratio, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLICKER_BELL_H */
