#ifndef QCHAIN_H
#define QCHAIN_H

#include <stddef.h>
#include <stdint.h>

#define QCHAIN_OK 0

#define QCHAIN_NULL_POINTER 1

#define QCHAIN_INVALID_ARGUMENT 2

#define QCHAIN_DENSE_BUDGET 3

#define QCHAIN_UNSUPPORTED 4

#define QCHAIN_NUMERICAL 5

#define QCHAIN_BUFFER_TOO_SMALL 6

#define QCHAIN_PANIC 7

// A sampled Hamiltonian.
typedef struct QchainHamiltonian QchainHamiltonian;

// Ascending eigenvalues of a Hamiltonian.
typedef struct QchainSpectrum QchainSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or NULL. Valid until the next failing call.
const char *qchain_last_error(void);

// Static description of a status code.
const char *qchain_status_name(int32_t code);

// Draws sample `index` of the named family (`generic`, `local`, `inv-local`, ...).
//
// # Safety
// `family` must be a NUL-terminated string and `out` a valid pointer.
int32_t qchain_hamiltonian_sample(const char *family,
                                  uintptr_t n,
                                  uint64_t seed,
                                  uint64_t index,
                                  struct QchainHamiltonian **out);

// # Safety
// `h` must come from this library and not have been freed; NULL is ignored.
void qchain_hamiltonian_free(struct QchainHamiltonian *h);

// # Safety
// `h` must be a live handle and `out` writable.
int32_t qchain_hamiltonian_qubits(const struct QchainHamiltonian *h, uintptr_t *out);

// # Safety
// `h` must be a live handle and `out` writable.
int32_t qchain_hamiltonian_term_count(const struct QchainHamiltonian *h, uintptr_t *out);

// Full spectrum by dense diagonalisation.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
int32_t qchain_hamiltonian_spectrum(const struct QchainHamiltonian *h, struct QchainSpectrum **out);

// Spectrum of a Hamiltonian made of nearest-neighbour fermion bilinears.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
int32_t qchain_hamiltonian_jw_spectrum(const struct QchainHamiltonian *h,
                                       struct QchainSpectrum **out);

// Sets `passed` to 1 when every eigenvector has a maximally mixed single-qubit
// state (within `tol`), 0 otherwise. `applicable` is 0 when the spectrum is degenerate
// or local terms are present, and `passed` is then 0 as well.
//
// # Safety
// `h` must be a live handle; `applicable` and `passed` must be writable.
int32_t qchain_hamiltonian_single_qubit_check(const struct QchainHamiltonian *h,
                                              double tol,
                                              int32_t *applicable,
                                              int32_t *passed);

// # Safety
// `s` must come from this library and not have been freed; NULL is ignored.
void qchain_spectrum_free(struct QchainSpectrum *s);

// # Safety
// `s` must be a live handle and `out` writable.
int32_t qchain_spectrum_len(const struct QchainSpectrum *s, uintptr_t *out);

// Copies the eigenvalues into `buf`. Fails with `QCHAIN_BUFFER_TOO_SMALL` if `len` is short.
//
// # Safety
// `s` must be a live handle and `buf` must have room for `len` doubles.
int32_t qchain_spectrum_copy(const struct QchainSpectrum *s, double *buf, uintptr_t len);

// One-eigenvalue marginal of the conjectured two-qubit eigenvalue density.
//
// # Safety
// `out` must be writable.
int32_t qchain_hciz_one_point(double lambda, double *out);

// Average purity of `l`-site blocks over the joint translation and field eigenbasis.
//
// # Safety
// `out` must be writable.
int32_t qchain_translation_basis_purity(uintptr_t n, uintptr_t l, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCHAIN_H */
