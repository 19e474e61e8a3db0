#ifndef MIXMEAS_H
#define MIXMEAS_H

/* Generated by cbindgen from mixmeas-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum MixmeasStatus {
  MIXMEAS_STATUS_OK = 0,
  MIXMEAS_STATUS_NULL_POINTER = 1,
  MIXMEAS_STATUS_INVALID_ARGUMENT = 2,
  MIXMEAS_STATUS_PARSE_ERROR = 3,
  MIXMEAS_STATUS_COMPUTE_ERROR = 4,
  MIXMEAS_STATUS_PANIC = 5,
} MixmeasStatus;

// Opaque handle to a built POVM.
typedef struct MixmeasPovm MixmeasPovm;

// Opaque handle to a validated isotropic prior.
typedef struct MixmeasPrior MixmeasPrior;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *mixmeas_version(void);

// Message describing the most recent failure on this thread. The pointer
// stays valid until the next failing call on the same thread.
const char *mixmeas_last_error_message(void);

// Parses a prior from a builtin name (`pure`, `random`, `uniform-ball`),
// the shorthand `two-point:m1@b1,m2@b2`, or a JSON document, and stores a
// new handle in `out`.
//
// # Safety
// `spec` must be a NUL-terminated string and `out` a valid pointer; the
// returned handle must be released with [`mixmeas_prior_free`].
enum MixmeasStatus mixmeas_prior_parse(const char *spec, struct MixmeasPrior **out);

// Releases a prior handle; a null pointer is a no-op.
//
// # Safety
// `prior` must have been produced by [`mixmeas_prior_parse`] and not yet
// freed.
void mixmeas_prior_free(struct MixmeasPrior *prior);

// Maximal mean fidelity by the closed form. `order` = 0 uses the default
// quadrature order.
//
// # Safety
// `prior` must be a live handle and `out` a valid pointer.
enum MixmeasStatus mixmeas_fbar_closed(const struct MixmeasPrior *prior,
                                       uint32_t copies,
                                       uint32_t order,
                                       double *out);

// Maximal mean fidelity by direct integration over outcomes and prior.
//
// # Safety
// `prior` must be a live handle and `out` a valid pointer.
enum MixmeasStatus mixmeas_fbar_direct(const struct MixmeasPrior *prior,
                                       uint32_t copies,
                                       uint32_t order,
                                       double *out);

// Guess magnitude r_{N,s} for one sector.
//
// # Safety
// `prior` must be a live handle and `out` a valid pointer.
enum MixmeasStatus mixmeas_guess_magnitude(const struct MixmeasPrior *prior,
                                           uint32_t copies,
                                           uint32_t twice_s,
                                           uint32_t order,
                                           double *out);

// Builds the minimal POVM for N copies and stores a new handle in `out`.
//
// # Safety
// `prior` must be a live handle and `out` a valid pointer; the returned
// handle must be released with [`mixmeas_povm_free`].
enum MixmeasStatus mixmeas_povm_build(const struct MixmeasPrior *prior,
                                      uint32_t copies,
                                      uint32_t order,
                                      struct MixmeasPovm **out);

// Releases a POVM handle; a null pointer is a no-op.
//
// # Safety
// `povm` must have been produced by [`mixmeas_povm_build`] and not yet
// freed.
void mixmeas_povm_free(struct MixmeasPovm *povm);

// Number of outcomes; 0 for a null handle.
//
// # Safety
// `povm` must be a live handle or null.
size_t mixmeas_povm_element_count(const struct MixmeasPovm *povm);

// Max-norm residual of Σ O − I.
//
// # Safety
// `povm` must be a live handle and `out` a valid pointer.
enum MixmeasStatus mixmeas_povm_identity_residual(const struct MixmeasPovm *povm, double *out);

// Serializes the POVM document (optionally with dense matrices) into a
// newly allocated NUL-terminated JSON string.
//
// # Safety
// `povm` must be a live handle and `out` a valid pointer; the returned
// string must be released with [`mixmeas_string_free`].
enum MixmeasStatus mixmeas_povm_to_json(const struct MixmeasPovm *povm,
                                        bool with_matrices,
                                        char **out);

// Releases a string returned by this library; a null pointer is a no-op.
//
// # Safety
// `s` must have been produced by this library and not yet freed.
void mixmeas_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIXMEAS_H */
