#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gboc/error.hpp"
#include "gboc/kernels.hpp"
#include "test_util.hpp"

using namespace gboc;
namespace k = gboc::kernels;

namespace {

std::vector<k::Backend> simd_backends() {
  std::vector<k::Backend> out;
  for (auto b : {k::Backend::Avx2, k::Backend::Neon}) {
    if (k::available(b)) out.push_back(b);
  }
  return out;
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, -2.0, 2.0);
  return v;
}

// Differences come only from summation order and fused multiply-adds, so they
// are bounded by a few ulps of the absolute sum.
double tol(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] * b[i]) + std::abs(a[i] - b[i]) * std::abs(a[i] - b[i]);
  return 1e-13 * (s + 1.0);
}

}  // namespace

TEST(Kernels, ScalarAlwaysAvailable) {
  EXPECT_TRUE(k::available(k::Backend::Scalar));
  EXPECT_EQ(k::table(k::Backend::Scalar).backend, k::Backend::Scalar);
  EXPECT_TRUE(k::available(k::best_available()));
}

TEST(Kernels, UnavailableBackendRejected) {
  for (auto b : {k::Backend::Avx2, k::Backend::Neon}) {
    if (!k::available(b)) {
      try {
        k::table(b);
        FAIL() << "expected BadParams";
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BadParams);
      }
    }
  }
}

TEST(Kernels, ScalarMatchesHandValues) {
  const auto& s = k::table(k::Backend::Scalar);
  const double a[] = {1, 2, 3};
  const double b[] = {4, -5, 6};
  EXPECT_EQ(s.dot(a, b, 3), 12.0);
  EXPECT_EQ(s.squared_distance(a, b, 3), 9.0 + 49.0 + 9.0);
  double y[] = {1, 1, 1};
  s.axpy(2.0, a, y, 3);
  EXPECT_EQ(y[2], 7.0);
  // [1 2 3; 4 -5 6]^T [1, 2] = [9, -8, 15]
  const double m[] = {1, 2, 3, 4, -5, 6};
  const double x[] = {1, 2};
  double out[] = {0, 0, 0};
  s.vecmat(m, 2, 3, x, out);
  EXPECT_EQ(out[0], 9.0);
  EXPECT_EQ(out[1], -8.0);
  EXPECT_EQ(out[2], 15.0);
}

TEST(Kernels, SimdMatchesScalarOnAllLengths) {
  const auto& ref = k::table(k::Backend::Scalar);
  auto rng = make_rng(7, 0);
  for (auto backend : simd_backends()) {
    const auto& simd = k::table(backend);
    for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 32, 33, 64, 96, 128, 131}) {
      const auto a = random_vec(n, rng);
      const auto b = random_vec(n, rng);
      EXPECT_NEAR(simd.dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), tol(a, b)) << n;
      EXPECT_NEAR(simd.squared_distance(a.data(), b.data(), n), ref.squared_distance(a.data(), b.data(), n), tol(a, b))
          << n;

      auto y1 = random_vec(n, rng);
      auto y2 = y1;
      ref.axpy(0.37, a.data(), y1.data(), n);
      simd.axpy(0.37, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-14 * (1 + std::abs(y1[i])));
    }
  }
}

TEST(Kernels, SimdVecmatMatchesScalar) {
  const auto& ref = k::table(k::Backend::Scalar);
  auto rng = make_rng(8, 0);
  for (auto backend : simd_backends()) {
    const auto& simd = k::table(backend);
    for (std::size_t rows : {1, 2, 3, 33}) {
      for (std::size_t cols : {1, 3, 4, 7, 16, 17, 20, 64, 128, 130}) {
        const auto m = random_vec(rows * cols, rng);
        const auto x = random_vec(rows, rng);
        auto y1 = random_vec(cols, rng);
        auto y2 = y1;
        ref.vecmat(m.data(), rows, cols, x.data(), y1.data());
        simd.vecmat(m.data(), rows, cols, x.data(), y2.data());
        for (std::size_t c = 0; c < cols; ++c) {
          EXPECT_NEAR(y1[c], y2[c], 1e-13 * (static_cast<double>(rows) * 4.0 + 2.0)) << rows << "x" << cols;
        }
      }
    }
  }
}

TEST(Kernels, SelectSwitchesActiveTable) {
  const auto original = k::active().backend;
  k::select(k::Backend::Scalar);
  EXPECT_EQ(k::active().backend, k::Backend::Scalar);
  k::select(original);
  EXPECT_EQ(k::active().backend, original);
  EXPECT_EQ(k::name(k::Backend::Avx2), "avx2");
}
