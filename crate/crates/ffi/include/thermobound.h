#ifndef THERMOBOUND_H
#define THERMOBOUND_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum TbStatus {
  TB_STATUS_OK = 0,
  TB_STATUS_NULL_POINTER = 1,
  /**
   * Argument outside a function's domain, e.g. a negative `g` argument.
   */
  TB_STATUS_DOMAIN = 2,
  /**
   * Invalid parameter, grid or temperature.
   */
  TB_STATUS_INVALID_ARGUMENT = 3,
  /**
   * An iteration or the eigensolver did not converge.
   */
  TB_STATUS_NO_CONVERGENCE = 4,
  /**
   * Overflow or another non-finite intermediate.
   */
  TB_STATUS_NUMERICAL = 5,
  /**
   * A bound or an exact identity failed beyond tolerance.
   */
  TB_STATUS_VIOLATION = 6,
  /**
   * Internal error; the library caught a panic.
   */
  TB_STATUS_PANIC = 7,
} TbStatus;

/**
 * Opaque model handle.
 */
typedef struct TbModel TbModel;

/**
 * Values of `hbar` and `k_B`; pass `NULL` for natural units.
 */
typedef struct TbUnits {
  double hbar;
  double k_boltzmann;
} TbUnits;

/**
 * Thermal statistics and bounds at one temperature. Unsuffixed momentum
 * fields use the spread of the commutator momentum, `_kinetic` ones the
 * spread from the kinetic energy.
 */
typedef struct TbThermalReport {
  double temperature;
  double beta;
  double delta_x;
  double delta_p;
  double delta_p_kinetic;
  double lambda_th;
  double ratio_r;
  double z;
  double gamma;
  double w;
  double product_lhs;
  double heisenberg_rhs;
  double boltzmann_rhs;
  double momentum_lhs;
  double momentum_rhs;
  double saturation_product;
  double saturation_momentum;
  /**
   * Boltzmann weight of the highest level in the basis.
   */
  double top_weight;
  bool holds_heisenberg;
  bool holds_boltzmann;
  bool holds_momentum;
  bool truncated;
} TbThermalReport;

/**
 * Residuals of the spectral identities at one temperature.
 */
typedef struct TbSpectralReport {
  size_t n_atoms;
  double zero_atom_mass;
  double total_p;
  double total_q;
  double detailed_balance_residual;
  double first_moment_residual;
  double second_moment_residual;
  double sum_rule_residual;
  /**
   * Against the sum rule of the model's own representation.
   */
  double sum_rule_basis_residual;
  double jensen_lhs;
  double jensen_rhs;
  double jensen_slack;
} TbSpectralReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * `g(x) = x tanh(x/2)` for `x >= 0`.
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum TbStatus tb_g(double x, double *out);

/**
 * Inverse of `g` on `[0, inf)`.
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum TbStatus tb_g_inverse(double y, double *out);

/**
 * `Gamma(x) = g^{-1}(x) / x` for `x > 0`.
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum TbStatus tb_gamma(double x, double *out);

/**
 * `w(z) = g^{-1}(z) / sqrt(2z)` with `w(0) = 1`.
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum TbStatus tb_w(double z, double *out);

/**
 * Closed-form harmonic oscillator with `n_levels` levels.
 *
 * # Safety
 * `units` must be NULL or valid; `out` must be NULL or valid for writes.
 */
enum TbStatus tb_model_harmonic(double mass,
                                double omega0,
                                size_t n_levels,
                                const struct TbUnits *units,
                                struct TbModel **out);

/**
 * Closed-form infinite square well of width `length`.
 *
 * # Safety
 * `units` must be NULL or valid; `out` must be NULL or valid for writes.
 */
enum TbStatus tb_model_box(double mass,
                           double length,
                           size_t n_levels,
                           const struct TbUnits *units,
                           struct TbModel **out);

/**
 * Finite-difference model with `V(x) = sum_k coefficients[k] x^k` on
 * `n_points` interior points of `(x_min, x_max)` with hard walls.
 *
 * # Safety
 * `coefficients` must point to `n_coefficients` doubles; `units` must be NULL
 * or valid; `out` must be NULL or valid for writes.
 */
enum TbStatus tb_model_grid_polynomial(double mass,
                                       double x_min,
                                       double x_max,
                                       size_t n_points,
                                       const double *coefficients,
                                       size_t n_coefficients,
                                       const struct TbUnits *units,
                                       struct TbModel **out);

/**
 * Number of levels in the model's basis; 0 for NULL.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
size_t tb_model_n_levels(const struct TbModel *model);

/**
 * Releases a model. NULL is ignored.
 *
 * # Safety
 * `model` must be NULL or a handle not yet freed.
 */
void tb_model_free(struct TbModel *model);

/**
 * Thermal statistics and the three bounds at `temperature`.
 *
 * # Safety
 * `model` must be NULL or a live handle; `out` must be NULL or valid for
 * writes.
 */
enum TbStatus tb_evaluate(const struct TbModel *model,
                          double temperature,
                          struct TbThermalReport *out);

/**
 * Spectral measures and identity residuals at `temperature`.
 *
 * # Safety
 * `model` must be NULL or a live handle; `out` must be NULL or valid for
 * writes.
 */
enum TbStatus tb_spectral(const struct TbModel *model,
                          double temperature,
                          struct TbSpectralReport *out);

/**
 * Message of the last failure on this thread, or NULL if none. The string
 * stays valid until the next failing call on the same thread.
 */
const char *tb_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tb_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* THERMOBOUND_H */
