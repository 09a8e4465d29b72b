#ifndef QLIANG_H
#define QLIANG_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a fallible call.
typedef enum QliangStatus {
  QLIANG_STATUS_OK = 0,
  QLIANG_STATUS_NULL_POINTER = 1,
  QLIANG_STATUS_INVALID_ARGUMENT = 2,
  // The total Hilbert-space dimension exceeds the cap (`QLIANG_DIM_CAP`).
  QLIANG_STATUS_DIMENSION_CAP = 3,
  QLIANG_STATUS_INVALID_STATE = 4,
  QLIANG_STATUS_CONFIG = 5,
  QLIANG_STATUS_NUMERICAL = 6,
  QLIANG_STATUS_IO = 7,
  QLIANG_STATUS_INVALID_UTF8 = 8,
  QLIANG_STATUS_OUT_OF_RANGE = 9,
  QLIANG_STATUS_BUFFER_TOO_SMALL = 10,
  QLIANG_STATUS_PANIC = 255,
} QliangStatus;

// Column selector for [`qliang_series_copy`].
typedef enum QliangColumn {
  QLIANG_COLUMN_TIME = 0,
  // Target entropy under the full dynamics, bits.
  QLIANG_COLUMN_S_TARGET = 1,
  // Target entropy with the sources frozen, bits.
  QLIANG_COLUMN_S_TARGET_FROZEN = 2,
  // Cumulative flow, bits.
  QLIANG_COLUMN_CUMULATIVE = 3,
  // Flow rate, bits per unit time.
  QLIANG_COLUMN_RATE = 4,
} QliangColumn;

// Network Hamiltonian: XY couplings and z fields over labelled sites.
typedef struct QliangHamiltonian QliangHamiltonian;

// Every flow of an evaluated scenario, across variants.
typedef struct QliangResult QliangResult;

// Parsed and validated scenario file.
typedef struct QliangScenario QliangScenario;

// One flow evaluated on a time grid.
typedef struct QliangSeries QliangSeries;

// Density matrix on the sites of a Hamiltonian.
typedef struct QliangState QliangState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static string.
const char *qliang_version(void);

// Message of the last failed call on this thread, or NULL after a
// successful call. Valid until the next `qliang_*` call on this thread.
const char *qliang_last_error_message(void);

// Creates a Hamiltonian with no terms over `n` qubit sites; the first label
// is the most significant tensor factor.
//
// # Safety
// `labels` points to `n` valid C strings; `out` is writable.
enum QliangStatus qliang_hamiltonian_new(const char *const *labels,
                                         size_t n,
                                         struct QliangHamiltonian **out);

// Adds the XY exchange `eta (s+_i s-_j + s-_i s+_j)`.
//
// # Safety
// `h` is a live Hamiltonian handle; `i` and `j` are valid C strings.
enum QliangStatus qliang_hamiltonian_add_coupling(struct QliangHamiltonian *h,
                                                  const char *i,
                                                  const char *j,
                                                  double eta);

// Adds the local field `b sz_site`.
//
// # Safety
// `h` is a live Hamiltonian handle; `site` is a valid C string.
enum QliangStatus qliang_hamiltonian_add_field_z(struct QliangHamiltonian *h,
                                                 const char *site,
                                                 double b);

// Hilbert-space dimension, or 0 for NULL.
//
// # Safety
// `h` is NULL or a live Hamiltonian handle.
size_t qliang_hamiltonian_dim(const struct QliangHamiltonian *h);

// # Safety
// `h` is NULL or a handle from [`qliang_hamiltonian_new`], not yet freed.
void qliang_hamiltonian_free(struct QliangHamiltonian *h);

// Density matrix from row-major real and imaginary parts, `dim * dim`
// entries each; `im` may be NULL for a real matrix.
//
// # Safety
// `h` is a live Hamiltonian handle; `re` (and `im` unless NULL) point to
// `dim * dim` doubles; `out` is writable.
enum QliangStatus qliang_state_new(const struct QliangHamiltonian *h,
                                   const double *re,
                                   const double *im,
                                   size_t dim,
                                   struct QliangState **out);

// Product of diagonal qubit states, `diag(1 - p, p)` per site in
// registry order, where `p` is the excited-state population.
//
// # Safety
// `h` is a live Hamiltonian handle; `excited` points to `n` doubles;
// `out` is writable.
enum QliangStatus qliang_state_product(const struct QliangHamiltonian *h,
                                       const double *excited,
                                       size_t n,
                                       struct QliangState **out);

// Von Neumann entropy in bits of the marginal on `keep`; `n = 0` means
// the whole state.
//
// # Safety
// `state` is a live state handle; `keep` points to `n` valid C strings;
// `out` is writable.
enum QliangStatus qliang_state_entropy(const struct QliangState *state,
                                       const char *const *keep,
                                       size_t n,
                                       double *out);

// # Safety
// `state` is NULL or a live state handle, not yet freed.
void qliang_state_free(struct QliangState *state);

// Cumulative flow from `sources` to `target` on the grid
// `t_k = k t_max / steps`, `k = 0..=steps`.
//
// # Safety
// `h` and `state` are live handles over the same sites; `sources` and
// `target` point to `n_sources` and `n_target` valid C strings; `out` is
// writable.
enum QliangStatus qliang_cumulative_flow(const struct QliangHamiltonian *h,
                                         const struct QliangState *state,
                                         const char *const *sources,
                                         size_t n_sources,
                                         const char *const *target,
                                         size_t n_target,
                                         double t_max,
                                         size_t steps,
                                         struct QliangSeries **out);

// Number of grid points, or 0 for NULL.
//
// # Safety
// `series` is NULL or a live series handle.
size_t qliang_series_len(const struct QliangSeries *series);

// Flow label such as `"AB->C"`; owned by the series.
//
// # Safety
// `series` is NULL or a live series handle.
const char *qliang_series_label(const struct QliangSeries *series);

// Scenario variant name, empty for the base configuration; owned by the
// series.
//
// # Safety
// `series` is NULL or a live series handle.
const char *qliang_series_variant(const struct QliangSeries *series);

// Copies one column (a [`QliangColumn`] value) into `buf`, which must hold
// at least [`qliang_series_len`] doubles.
//
// # Safety
// `series` is a live series handle; `buf` points to `len` writable doubles.
enum QliangStatus qliang_series_copy(const struct QliangSeries *series,
                                     int column,
                                     double *buf,
                                     size_t len);

// # Safety
// `series` is NULL or a handle from [`qliang_cumulative_flow`], not yet
// freed. Series borrowed from a result must not be passed here.
void qliang_series_free(struct QliangSeries *series);

// Parses and validates a scenario from JSON text.
//
// # Safety
// `json` is a valid C string; `out` is writable.
enum QliangStatus qliang_scenario_from_json(const char *json, struct QliangScenario **out);

// Loads and validates a scenario file.
//
// # Safety
// `path` is a valid C string; `out` is writable.
enum QliangStatus qliang_scenario_load(const char *path, struct QliangScenario **out);

// One of the scenarios shipped with the library, by name (e.g. `"fig1a"`).
//
// # Safety
// `name` is a valid C string; `out` is writable.
enum QliangStatus qliang_scenario_bundled(const char *name, struct QliangScenario **out);

// Evaluates every flow of every variant.
//
// # Safety
// `scenario` is a live scenario handle; `out` is writable.
enum QliangStatus qliang_scenario_evaluate(const struct QliangScenario *scenario,
                                           struct QliangResult **out);

// Writes the CSV (and, if the scenario asks for it, SVG) files into `dir`.
//
// # Safety
// `scenario` and `result` are live handles, `result` evaluated from
// `scenario`; `dir` is a valid C string.
enum QliangStatus qliang_scenario_write_outputs(const struct QliangScenario *scenario,
                                                const struct QliangResult *result,
                                                const char *dir);

// # Safety
// `scenario` is NULL or a live scenario handle, not yet freed.
void qliang_scenario_free(struct QliangScenario *scenario);

// Number of series across all variants, or 0 for NULL.
//
// # Safety
// `result` is NULL or a live result handle.
size_t qliang_result_series_count(const struct QliangResult *result);

// Borrowed series `index`, or NULL when out of range. Valid until the
// result is freed; do not free it separately.
//
// # Safety
// `result` is NULL or a live result handle.
const struct QliangSeries *qliang_result_series(const struct QliangResult *result, size_t index);

// # Safety
// `result` is NULL or a live result handle, not yet freed.
void qliang_result_free(struct QliangResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QLIANG_H */
