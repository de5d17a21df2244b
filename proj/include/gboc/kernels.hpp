#pragma once

// Dense double-precision inner loops used by the encoder, decoder, k-means and
// nearest-center search. Each kernel exists as a portable scalar reference and
// as SIMD variants (AVX2+FMA on x86-64, NEON on AArch64); the variant is chosen
// once at startup from the CPU features and can be overridden with the
// GBOC_KERNELS environment variable ("scalar", "avx2", "neon") or select().

#include <cstddef>
#include <span>
#include <string_view>

namespace gboc::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i (a[i] - b[i])^2
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[c] += sum_r x[r] * m[r * cols + c]   (y += x^T M, M row-major rows x cols)
  void (*vecmat)(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
};

bool available(Backend b) noexcept;
Backend best_available() noexcept;
const KernelTable& table(Backend b);  // throws Error(BadParams) when unavailable
const KernelTable& active() noexcept;
void select(Backend b);
std::string_view name(Backend b) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void vecmat(std::span<const double> m, std::size_t rows, std::span<const double> x,
                   std::span<double> y) {
  active().vecmat(m.data(), rows, y.size(), x.data(), y.data());
}

}  // namespace gboc::kernels
