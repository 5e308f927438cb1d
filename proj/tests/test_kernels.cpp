#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "sdjls/kernels.hpp"

namespace k = sdjls::kernels;

namespace {

std::vector<double> random_vector(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

class BackendGuard {
 public:
  BackendGuard() : saved_(k::active_backend()) {}
  ~BackendGuard() { k::set_backend(saved_); }

 private:
  k::Backend saved_;
};

}  // namespace

TEST(Kernels, ScalarReference) {
  const std::vector<double> m{1, 2, 3, 4, 5, 6};
  const std::vector<double> x{1, -1, 2};
  std::vector<double> y(2);
  k::scalar::gemv(m.data(), 2, 3, x.data(), y.data());
  EXPECT_DOUBLE_EQ(y[0], 5.0);
  EXPECT_DOUBLE_EQ(y[1], 11.0);
  EXPECT_DOUBLE_EQ(k::scalar::dot(x.data(), x.data(), 3), 6.0);
  std::vector<double> z{1, 1, 1};
  k::scalar::axpy(2.0, x.data(), z.data(), 3);
  EXPECT_EQ(z, (std::vector<double>{3, -1, 5}));
}

TEST(Kernels, ScalarAlwaysAvailable) {
  EXPECT_TRUE(k::backend_available(k::Backend::Scalar));
  BackendGuard guard;
  k::set_backend(k::Backend::Scalar);
  EXPECT_EQ(k::active_backend(), k::Backend::Scalar);
}

TEST(Kernels, SpanLengthChecks) {
  std::vector<double> m(6), x(3), y(2), bad(1);
  EXPECT_NO_THROW(k::gemv(m, 2, 3, x, y));
  EXPECT_ANY_THROW(k::gemv(m, 2, 3, bad, y));
  EXPECT_ANY_THROW(k::dot(x, bad));
  EXPECT_ANY_THROW(k::axpy(1.0, x, bad));
}

#if defined(SDJLS_HAVE_AVX2)
TEST(Kernels, Avx2MatchesScalar) {
  if (!k::backend_available(k::Backend::Avx2)) GTEST_SKIP() << "CPU without AVX2/FMA";
  std::mt19937_64 gen(17);
  for (std::size_t rows : {1u, 3u, 4u, 5u, 8u, 13u, 64u}) {
    for (std::size_t cols : {1u, 2u, 3u, 4u, 7u, 16u, 33u, 100u}) {
      const auto m = random_vector(gen, rows * cols);
      const auto x = random_vector(gen, cols);
      std::vector<double> ys(rows), yv(rows);
      k::scalar::gemv(m.data(), rows, cols, x.data(), ys.data());
      k::avx2::gemv(m.data(), rows, cols, x.data(), yv.data());
      for (std::size_t r = 0; r < rows; ++r) EXPECT_NEAR(ys[r], yv[r], 1e-13 * cols) << rows << "x" << cols;
    }
  }
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 31u, 1000u}) {
    const auto a = random_vector(gen, n);
    const auto b = random_vector(gen, n);
    EXPECT_NEAR(k::scalar::dot(a.data(), b.data(), n), k::avx2::dot(a.data(), b.data(), n), 1e-13 * (n + 1));
    auto ys = b, yv = b;
    k::scalar::axpy(-0.7, a.data(), ys.data(), n);
    k::avx2::axpy(-0.7, a.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(ys[i], yv[i], 1e-15);
  }
}

TEST(Kernels, DispatchFollowsBackend) {
  if (!k::backend_available(k::Backend::Avx2)) GTEST_SKIP() << "CPU without AVX2/FMA";
  BackendGuard guard;
  std::mt19937_64 gen(3);
  const auto m = random_vector(gen, 12 * 10);
  const auto x = random_vector(gen, 10);
  std::vector<double> y1(12), y2(12);
  k::set_backend(k::Backend::Scalar);
  k::gemv(m, 12, 10, x, y1);
  k::set_backend(k::Backend::Avx2);
  k::gemv(m, 12, 10, x, y2);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-13);
}
#endif
