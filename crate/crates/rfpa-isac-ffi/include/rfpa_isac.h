/* C API of the rfpa-isac simulation library. */

#ifndef RFPA_ISAC_H
#define RFPA_ISAC_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Information embedding scheme selector.
 */
typedef enum RfpaScheme {
  RFPA_SCHEME_PH = 0,
  RFPA_SCHEME_AMP = 1,
  RFPA_SCHEME_SIM = 2,
  RFPA_SCHEME_HYB = 3,
} RfpaScheme;

/**
 * Result status of every fallible call.
 */
typedef enum RfpaStatus {
  RFPA_STATUS_OK = 0,
  RFPA_STATUS_NULL_ARGUMENT = 1,
  RFPA_STATUS_INVALID_UTF8 = 2,
  RFPA_STATUS_CONFIG_ERROR = 3,
  RFPA_STATUS_RUNTIME_ERROR = 4,
  RFPA_STATUS_BUFFER_TOO_SMALL = 5,
} RfpaStatus;

/**
 * Opaque validated waveform configuration.
 */
typedef struct RfpaConfig RfpaConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the most recent error message of this thread into `buf` (NUL
 * terminated, truncated to `len`); returns the full message length.
 */
uintptr_t rfpa_last_error_message(char *buf, uintptr_t len);

/**
 * Library version as a static string.
 */
const char *rfpa_version(void);

/**
 * Builds the built-in default configuration.
 */
struct RfpaConfig *rfpa_config_default(void);

/**
 * Parses and validates a configuration from `key = value` text.
 */
enum RfpaStatus rfpa_config_parse(const char *text, struct RfpaConfig **out);

/**
 * Releases a configuration handle.
 */
void rfpa_config_free(struct RfpaConfig *cfg);

/**
 * Samples in the active segment of one pulse (per antenna).
 */
uintptr_t rfpa_config_samples_per_pulse(const struct RfpaConfig *cfg);

/**
 * Transmit antenna count.
 */
uintptr_t rfpa_config_antennas(const struct RfpaConfig *cfg);

/**
 * Short hex digest of the resolved configuration.
 */
enum RfpaStatus rfpa_config_digest(const struct RfpaConfig *cfg, char *buf, uintptr_t len);

/**
 * Achievable bit rate in bits per second for a scheme under `cfg`.
 */
enum RfpaStatus rfpa_achievable_rate(const struct RfpaConfig *cfg,
                                     enum RfpaScheme scheme,
                                     double *out_rate);

/**
 * Synthesizes one pulse with a random message and random secrets derived
 * from `seed`, writing interleaved I/Q samples row by row (antenna-major).
 *
 * `out` must hold `2 * antennas * samples_per_pulse` doubles; `written`
 * receives the number of doubles stored.
 */
enum RfpaStatus rfpa_generate_pulse(const struct RfpaConfig *cfg,
                                    uint64_t seed,
                                    uintptr_t pulse_index,
                                    double *out,
                                    uintptr_t out_len,
                                    uintptr_t *written);

/**
 * Closed-form MIMO ambiguity function at `(tau, nu)` for a random
 * realization derived from `seed` (zero spatial frequencies).
 */
enum RfpaStatus rfpa_mimo_af(const struct RfpaConfig *cfg,
                             uint64_t seed,
                             double tau,
                             double nu,
                             double *out_re,
                             double *out_im);

/**
 * One BER sweep point: Bob's and Eve's bit error rates over `trials` pulse
 * round-trips at the given Eb/N0.
 */
enum RfpaStatus rfpa_ber_point(const struct RfpaConfig *cfg,
                               enum RfpaScheme scheme,
                               double ebn0_db,
                               uintptr_t trials,
                               uint64_t seed,
                               double *out_ber_bob,
                               double *out_ber_eve);

/**
 * Secret-generation quality at one probing SNR: bit disagreement rate
 * between Alice and Bob and the entropy of Alice's sequence, for `phi`
 * quantization levels over `length` probing samples.
 */
enum RfpaStatus rfpa_crkg_point(uintptr_t length,
                                uintptr_t phi,
                                double snr_db,
                                uint64_t seed,
                                double *out_bdr,
                                double *out_entropy_bits);

/**
 * Binary-symmetric secrecy-rate estimate from two link BERs.
 */
enum RfpaStatus rfpa_secrecy_rate(double ber_bob, double ber_eve, double *out_rate);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RFPA_ISAC_H */
