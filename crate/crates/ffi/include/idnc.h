#ifndef IDNC_H
#define IDNC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IdncStatus {
  IDNC_STATUS_OK = 0,
  IDNC_STATUS_NULL_POINTER = 1,
  IDNC_STATUS_INVALID_ARGUMENT = 2,
  IDNC_STATUS_CONTRACT_VIOLATION = 3,
  IDNC_STATUS_RESOURCE_LIMIT = 4,
  IDNC_STATUS_BUFFER_TOO_SMALL = 5,
  IDNC_STATUS_PANIC = 6,
} IdncStatus;

typedef enum IdncPolicy {
  IDNC_POLICY_MDD_GREEDY = 0,
  IDNC_POLICY_SDD_GREEDY = 1,
  IDNC_POLICY_MDD_EXACT = 2,
  IDNC_POLICY_SDD_EXACT = 3,
} IdncPolicy;

/**
 * Opaque experiment configuration.
 */
typedef struct IdncConfig IdncConfig;

/**
 * Opaque sender state for one frame.
 */
typedef struct IdncFrame IdncFrame;

/**
 * Frame-averaged experiment results.
 */
typedef struct IdncStats {
  double mean_sum_delay;
  double mean_max_delay;
  double mean_served_fraction;
  double mean_recovery_transmissions;
  uint64_t frame_count;
  uint64_t incomplete_frames;
} IdncStats;

/**
 * One IDNC graph vertex: `receiver` wants `packet`.
 */
typedef struct IdncVertex {
  uint32_t receiver;
  uint32_t packet;
} IdncVertex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread, or an empty
 * string. The pointer stays valid until the next failing call on the same
 * thread.
 */
const char *idnc_last_error(void);

/**
 * New configuration with the library defaults: infinite deadline, 1000
 * frames, seed 0, greedy max-delay policy, `100 * packets` transmission cap.
 * Free with [`idnc_config_free`].
 */
struct IdncConfig *idnc_config_new(uint32_t receivers, uint32_t packets, double avg_erasure);

void idnc_config_free(struct IdncConfig *config);

/**
 * A negative `deadline` means no deadline.
 */
enum IdncStatus idnc_config_set_deadline(struct IdncConfig *config, int64_t deadline);

enum IdncStatus idnc_config_set_frames(struct IdncConfig *config, uint64_t frames);

enum IdncStatus idnc_config_set_seed(struct IdncConfig *config, uint64_t seed);

enum IdncStatus idnc_config_set_policy(struct IdncConfig *config, enum IdncPolicy policy);

enum IdncStatus idnc_config_set_max_transmissions(struct IdncConfig *config,
                                                  uint64_t max_transmissions);

/**
 * Ceiling on the per-frame spread of receiver erasure probabilities.
 */
enum IdncStatus idnc_config_set_spread_cap(struct IdncConfig *config, double cap);

/**
 * Runs every frame of the configured experiment and writes the averages to
 * `out`.
 */
enum IdncStatus idnc_run_experiment(const struct IdncConfig *config, struct IdncStats *out);

/**
 * New frame in which every receiver holds every packet and has zero delay.
 * `erasure_probs` must point to `receivers` values in `[0, 1]`. Returns null
 * on invalid input; see [`idnc_last_error`].
 */
struct IdncFrame *idnc_frame_new(uint32_t receivers, uint32_t packets, const double *erasure_probs);

void idnc_frame_free(struct IdncFrame *frame);

/**
 * Records that `receiver` lost `packet` (sets `f_ij = 1`).
 */
enum IdncStatus idnc_frame_set_wanted(struct IdncFrame *frame, uint32_t receiver, uint32_t packet);

enum IdncStatus idnc_frame_set_delay(struct IdncFrame *frame, uint32_t receiver, uint32_t delay);

/**
 * Writes `f_ij` (1 = wanted, 0 = held) to `out`.
 */
enum IdncStatus idnc_frame_get(const struct IdncFrame *frame,
                               uint32_t receiver,
                               uint32_t packet,
                               uint8_t *out);

enum IdncStatus idnc_frame_get_delay(const struct IdncFrame *frame,
                                     uint32_t receiver,
                                     uint32_t *out);

/**
 * Selects the clique `policy` would transmit next. Up to `capacity` vertices
 * are written to `out` and the clique size to `out_len`; a clique larger than
 * `capacity` yields `BufferTooSmall` with `out_len` still set. An empty
 * frame yields an empty clique.
 */
enum IdncStatus idnc_frame_select(const struct IdncFrame *frame,
                                  enum IdncPolicy policy,
                                  struct IdncVertex *out,
                                  size_t capacity,
                                  size_t *out_len);

/**
 * Probability that sending `clique` raises the maximum decoding delay of
 * the frame.
 */
enum IdncStatus idnc_frame_prob_max_delay_increase(const struct IdncFrame *frame,
                                                   const struct IdncVertex *clique,
                                                   size_t len,
                                                   double *out);

/**
 * Accounts a successful reception of the XOR of `packets` at `receiver`:
 * acknowledges an instantly decodable packet or charges one unit of delay.
 * The increment (0 or 1) is written to `increment`.
 */
enum IdncStatus idnc_frame_receive(struct IdncFrame *frame,
                                   uint32_t receiver,
                                   const uint32_t *packets,
                                   size_t len,
                                   uint32_t *increment);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IDNC_H */
