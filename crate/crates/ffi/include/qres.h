#ifndef QRES_H
#define QRES_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Result of a call.
 */
typedef enum QresStatus {
  QRES_STATUS_OK = 0,
  QRES_STATUS_NULL_POINTER = 1,
  QRES_STATUS_INVALID_UTF8 = 2,
  QRES_STATUS_IO = 3,
  QRES_STATUS_PARSE = 4,
  QRES_STATUS_INDEX = 5,
  QRES_STATUS_CONSISTENCY = 6,
  QRES_STATUS_DIMENSION = 7,
  QRES_STATUS_NORMALIZATION = 8,
  QRES_STATUS_KIND = 9,
  QRES_STATUS_ORTHOGONALITY = 10,
  QRES_STATUS_SYMMETRY = 11,
  QRES_STATUS_SOLVER = 12,
  QRES_STATUS_ARGUMENT = 13,
  QRES_STATUS_POOL = 14,
  QRES_STATUS_STATE = 15,
  QRES_STATUS_PANIC = 16,
} QresStatus;

/*
 Partitioning method.
 */
typedef enum QresMethod {
  QRES_METHOD_FC_SI = 0,
  QRES_METHOD_AC_SI = 1,
  QRES_METHOD_LR = 2,
  QRES_METHOD_LR_F3 = 3,
  QRES_METHOD_LR_LCU = 4,
} QresMethod;

/*
 Opaque handle to a loaded Hamiltonian with cached reference solutions.
 */
typedef struct QresCell QresCell;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Loads an FCIDUMP (or `.pauli` text) file into a new handle.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QresStatus qres_cell_load(const char *path, struct QresCell **out);

/*
 Releases a handle; null is ignored.

 # Safety
 `cell` must be null or a handle from `qres_cell_load` not yet freed.
 */
void qres_cell_free(struct QresCell *cell);

/*
 Number of qubits of the cell's Hamiltonian.

 # Safety
 `cell` must be a live handle and `out` a valid pointer.
 */
enum QresStatus qres_cell_n_qubits(const struct QresCell *cell, size_t *out);

/*
 Lowest eigenvalue in the electron-number sector, in hartree.

 # Safety
 `cell` must be a live handle and `out` a valid pointer.
 */
enum QresStatus qres_ground_energy(const struct QresCell *cell, double *out);

/*
 LCU 1-norm and unitary (AC-SI) or fragment (LR, LR-LCU) count,
 optionally after the optimal electron-number shift. `count` may be null.

 # Safety
 `cell` must be a live handle, `lambda` a valid pointer and `count` null
 or valid.
 */
enum QresStatus qres_lcu_lambda(const struct QresCell *cell,
                                enum QresMethod method,
                                bool shift,
                                double *lambda,
                                size_t *count);

/*
 Measurement count `M(ε)` for FC-SI, LR or LR-F3 fragments.

 # Safety
 `cell` must be a live handle and `out` a valid pointer.
 */
enum QresStatus qres_measurement_count(const struct QresCell *cell,
                                       enum QresMethod method,
                                       double epsilon,
                                       double *out);

/*
 Symmetry-projected commutator norm `κ_Q` and the first-order Trotter
 step count for FC-SI, LR or LR-LCU fragments. `steps` may be null.

 # Safety
 `cell` must be a live handle, `kappa` a valid pointer and `steps` null
 or valid.
 */
enum QresStatus qres_trotter_cost(const struct QresCell *cell,
                                  enum QresMethod method,
                                  double epsilon,
                                  double *kappa,
                                  uint64_t *steps);

/*
 Message of the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *qres_last_error(void);

/*
 Stable name of a status code.
 */
const char *qres_status_name(enum QresStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QRES_H */
