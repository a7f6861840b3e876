#ifndef QUMVQD_H
#define QUMVQD_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QvStatus {
  QV_STATUS_OK = 0,
  QV_STATUS_NULL_POINTER = 1,
  QV_STATUS_INVALID_ARGUMENT = 2,
  QV_STATUS_PARSE = 3,
  QV_STATUS_NUMERICAL = 4,
  QV_STATUS_CAPACITY = 5,
  QV_STATUS_SYMMETRY_VIOLATION = 6,
  QV_STATUS_TRUNCATION = 7,
  QV_STATUS_INPUT_INCONSISTENCY = 8,
  QV_STATUS_CONVERGENCE = 9,
  QV_STATUS_IO = 10,
  QV_STATUS_BUFFER_TOO_SMALL = 11,
  QV_STATUS_PANIC = 12,
} QvStatus;

/**
 * A Hamiltonian ready for the solver, with its exact spectrum.
 */
typedef struct QvHamiltonian QvHamiltonian;

/**
 * Deflation result plus the oracle it is compared against.
 */
typedef struct QvResult QvResult;

typedef struct QvCompressionReport {
  uint32_t m;
  uint32_t n_e;
  /**
   * `2^M`, exact below `2^53`.
   */
  double full_dim;
  double restricted_dim;
  double ratio;
  uint32_t qumodes_full;
  uint32_t qumodes_restricted;
} QvCompressionReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version string, static storage.
 */
const char *qv_version(void);

/**
 * Message of the last failed call on this thread, NUL-terminated.
 *
 * # Safety
 * `buf` must point to `len` writable bytes or be null; `needed` must be
 * null or writable.
 */
enum QvStatus qv_last_error_message(char *buf, size_t len, size_t *needed);

/**
 * Build the particle-number sector of a fermionic Hamiltonian given as
 * JSON text and place it on qumodes of cutoff `cutoff`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum QvStatus qv_hamiltonian_from_electronic_json(const char *json,
                                                  size_t n_e,
                                                  size_t cutoff,
                                                  struct QvHamiltonian **out);

/**
 * Load a vibrational fragment set from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum QvStatus qv_hamiltonian_from_fragments_json(const char *json, struct QvHamiltonian **out);

/**
 * Register dimension the solver works in.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum QvStatus qv_hamiltonian_dimension(const struct QvHamiltonian *h, size_t *out);

/**
 * Lowest `len` exact eigenvalues of the physical Hamiltonian, ascending.
 * `written` receives how many were stored.
 *
 * # Safety
 * `values` must hold `len` doubles; `h` must be a live handle.
 */
enum QvStatus qv_hamiltonian_eigenvalues(const struct QvHamiltonian *h,
                                         double *values,
                                         size_t len,
                                         size_t *written);

/**
 * # Safety
 * `h` must be null or a handle not yet freed.
 */
void qv_hamiltonian_free(struct QvHamiltonian *h);

/**
 * Run deflation with a JSON run configuration (`depth`, `k`, `betas`,
 * `seed`, `optimizer`, ...).
 *
 * # Safety
 * `h` must be a live handle, `config_json` NUL-terminated, `out` writable.
 */
enum QvStatus qv_run_vqd(const struct QvHamiltonian *h,
                         const char *config_json,
                         struct QvResult **out);

/**
 * # Safety
 * `r` must be a live handle; `out` writable.
 */
enum QvStatus qv_result_num_states(const struct QvResult *r, size_t *out);

/**
 * Energies ascending, with the matching exact eigenvalues in `oracle`
 * when it is non-null. Both buffers hold `len` doubles.
 *
 * # Safety
 * `r` must be a live handle; buffers must hold `len` doubles.
 */
enum QvStatus qv_result_energies(const struct QvResult *r,
                                 double *energies,
                                 double *oracle,
                                 size_t len);

/**
 * 1 when every state stopped on a convergence test, 0 otherwise.
 *
 * # Safety
 * `r` must be a live handle; `out` writable.
 */
enum QvStatus qv_result_converged(const struct QvResult *r, int32_t *out);

/**
 * Full result as JSON. Call with a null buffer to learn the size.
 *
 * # Safety
 * `r` must be a live handle; `buf` must hold `len` bytes or be null.
 */
enum QvStatus qv_result_to_json(const struct QvResult *r, char *buf, size_t len, size_t *needed);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void qv_result_free(struct QvResult *r);

/**
 * # Safety
 * `out` must be writable.
 */
enum QvStatus qv_compression_report(uint32_t m,
                                    uint32_t n_e,
                                    uint64_t d,
                                    struct QvCompressionReport *out);

/**
 * `(1 - (1 - p)^n) |reference|`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QvStatus qv_fidelity_energy_error(double p, uint64_t n, double reference, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUMVQD_H */
