#pragma once

#include <cstddef>
#include <span>

// Dense BLAS-1/2 style kernels behind the SDP engine's projection step.
// Every kernel has a portable scalar reference and, on x86-64, an AVX2/FMA
// variant. The variant is picked once at runtime from CPUID; the environment
// variable SDJLS_KERNELS=scalar forces the reference path.

namespace sdjls::kernels {

enum class Backend { Scalar, Avx2 };

const char* to_string(Backend backend);

/// True if the backend was compiled in and the CPU supports it.
bool backend_available(Backend backend);

Backend active_backend();

/// Overrides the runtime choice. Throws sdjls::Error if unavailable.
void set_backend(Backend backend);

/// y = M x with M row-major (rows x cols).
void gemv(std::span<const double> m, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y);

double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

namespace scalar {
void gemv(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

#if defined(SDJLS_HAVE_AVX2)
namespace avx2 {
void gemv(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2
#endif

}  // namespace sdjls::kernels
