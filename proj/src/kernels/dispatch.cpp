// Runtime selection only; no SIMD instructions in this file.

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "sdjls/errors.hpp"
#include "sdjls/kernels.hpp"

namespace sdjls::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(SDJLS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("SDJLS_KERNELS"); env && std::strcmp(env, "scalar") == 0) {
    return Backend::Scalar;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

void check_length(std::size_t got, std::size_t want, const char* what) {
  if (got < want) throw DimensionMismatchError(std::string("kernels: ") + what + " too short");
}

}  // namespace

const char* to_string(Backend backend) {
  switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend backend) {
  return backend == Backend::Scalar || cpu_has_avx2();
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (!backend_available(backend)) {
    throw Error(std::string("kernel backend not available: ") + to_string(backend));
  }
  current().store(backend, std::memory_order_relaxed);
}

void gemv(std::span<const double> m, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y) {
  check_length(m.size(), rows * cols, "matrix");
  check_length(x.size(), cols, "x");
  check_length(y.size(), rows, "y");
#if defined(SDJLS_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) return avx2::gemv(m.data(), rows, cols, x.data(), y.data());
#endif
  scalar::gemv(m.data(), rows, cols, x.data(), y.data());
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_length(b.size(), a.size(), "b");
#if defined(SDJLS_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) return avx2::dot(a.data(), b.data(), a.size());
#endif
  return scalar::dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_length(y.size(), x.size(), "y");
#if defined(SDJLS_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) return avx2::axpy(alpha, x.data(), y.data(), x.size());
#endif
  scalar::axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace sdjls::kernels
