#ifndef G2FLOW_H
#define G2FLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum G2Status {
  G2_STATUS_OK = 0,
  G2_STATUS_NULL_POINTER = 1,
  G2_STATUS_DOMAIN = 2,
  G2_STATUS_PRECONDITION = 3,
  G2_STATUS_NUMERICAL = 4,
  G2_STATUS_CONFIG = 5,
  G2_STATUS_INVALID_UTF8 = 6,
  G2_STATUS_PANIC = 99,
} G2Status;

// Opaque solution handle; keeps its structure alive.
typedef struct G2Solution G2Solution;

// Opaque structure handle.
typedef struct G2Structure G2Structure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length in bytes.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t g2_last_error_message(char *buf, size_t len);

// Bryant–Salamon structure with `r ∈ [1, r_max]`.
//
// # Safety
// `out` must be a valid pointer.
enum G2Status g2_structure_bryant_salamon(double r_max, struct G2Structure **out);

// Structure with `A = t/2`, `B = √(b₀² + t²/4)`.
//
// # Safety
// `out` must be a valid pointer.
enum G2Status g2_structure_linear(double b0, struct G2Structure **out);

// Structure from the JSON written by the `structure` command.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum G2Status g2_structure_from_json(const char *json, struct G2Structure **out);

// # Safety
// `s` must be a live handle; `b0` and `t_max` valid pointers.
enum G2Status g2_structure_info(const struct G2Structure *s, double *b0, double *t_max);

// # Safety
// `s` must be null or a handle not yet freed.
void g2_structure_free(struct G2Structure *s);

// Explicit `θ^{x₁}` family, `x₁ ≥ 0`.
//
// # Safety
// `s` must be a live handle and `out` a valid pointer.
enum G2Status g2_theta_x1(const struct G2Structure *s, double x1, struct G2Solution **out);

// Explicit `θ₀`.
//
// # Safety
// `s` must be a live handle and `out` a valid pointer.
enum G2Status g2_theta_zero(const struct G2Structure *s, struct G2Solution **out);

// `θ_{y₀}` solved from the singular orbit to `t_end` with default options.
//
// # Safety
// `s` must be a live handle and `out` a valid pointer.
enum G2Status g2_theta_y0(const struct G2Structure *s,
                          double y0,
                          double t_end,
                          struct G2Solution **out);

// Flat connection with `f⁻ = sign/B`, `sign = ±1`.
//
// # Safety
// `s` must be a live handle and `out` a valid pointer.
enum G2Status g2_flat(const struct G2Structure *s, int32_t sign, struct G2Solution **out);

// Largest `t` at which the solution can be evaluated.
//
// # Safety
// `sol` must be a live handle and `t_max` a valid pointer.
enum G2Status g2_solution_t_max(const struct G2Solution *sol, double *t_max);

// Diagonal connection coefficients `c_i^±` at `t` (`a_i^± = c_i^± T_i`).
//
// # Safety
// `sol` must be a live handle; `plus` and `minus` must each point to 3 doubles.
enum G2Status g2_solution_coefficients(const struct G2Solution *sol,
                                       double t,
                                       double *plus,
                                       double *minus);

// Diagonal coefficients `f_i^±` (the `c_i^±` divided by `A_i`, `B_i`).
//
// # Safety
// As [`g2_solution_coefficients`].
enum G2Status g2_solution_f_values(const struct G2Solution *sol,
                                   double t,
                                   double *plus,
                                   double *minus);

// Largest absolute instanton-equation residual at `t`.
//
// # Safety
// `sol` must be a live handle and `out` a valid pointer.
enum G2Status g2_solution_residual(const struct G2Solution *sol, double t, double *out);

// # Safety
// `sol` must be null or a handle not yet freed.
void g2_solution_free(struct G2Solution *sol);

// Largest coefficient difference between the brute-force curvature and
// the closed form for the connection with `a_i^+ = Σ_j plus[3i+j] T_j`
// and likewise for `minus`.
//
// # Safety
// `plus` and `minus` must each point to 9 doubles; `out` must be valid.
enum G2Status g2_curvature_discrepancy(const double *plus, const double *minus, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* G2FLOW_H */
