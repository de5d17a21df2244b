#pragma once

// Raw kernel entry points per instruction set. The SIMD translation units are
// compiled with extra target flags, so they must only be reached through the
// dispatch table after a CPU feature check.

#include <cstddef>

namespace gboc::kernels::scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void vecmat(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
}  // namespace gboc::kernels::scalar

namespace gboc::kernels::avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void vecmat(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
}  // namespace gboc::kernels::avx2

namespace gboc::kernels::neon {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void vecmat(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
}  // namespace gboc::kernels::neon
