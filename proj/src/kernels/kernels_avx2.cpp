// Built with -mavx2 -mfma. Keep this file free of standard library templates:
// anything inlined here would carry AVX2 code into shared COMDAT symbols.
#include "kernels_impl.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace gboc::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  if (i + 4 <= n) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void vecmat(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
  // Column blocks of 16 stay in registers across all rows.
  std::size_t c = 0;
  for (; c + 16 <= cols; c += 16) {
    __m256d y0 = _mm256_loadu_pd(y + c);
    __m256d y1 = _mm256_loadu_pd(y + c + 4);
    __m256d y2 = _mm256_loadu_pd(y + c + 8);
    __m256d y3 = _mm256_loadu_pd(y + c + 12);
    for (std::size_t r = 0; r < rows; ++r) {
      const __m256d xr = _mm256_set1_pd(x[r]);
      const double* mr = m + r * cols + c;
      y0 = _mm256_fmadd_pd(xr, _mm256_loadu_pd(mr), y0);
      y1 = _mm256_fmadd_pd(xr, _mm256_loadu_pd(mr + 4), y1);
      y2 = _mm256_fmadd_pd(xr, _mm256_loadu_pd(mr + 8), y2);
      y3 = _mm256_fmadd_pd(xr, _mm256_loadu_pd(mr + 12), y3);
    }
    _mm256_storeu_pd(y + c, y0);
    _mm256_storeu_pd(y + c + 4, y1);
    _mm256_storeu_pd(y + c + 8, y2);
    _mm256_storeu_pd(y + c + 12, y3);
  }
  for (; c + 4 <= cols; c += 4) {
    __m256d y0 = _mm256_loadu_pd(y + c);
    for (std::size_t r = 0; r < rows; ++r) {
      y0 = _mm256_fmadd_pd(_mm256_set1_pd(x[r]), _mm256_loadu_pd(m + r * cols + c), y0);
    }
    _mm256_storeu_pd(y + c, y0);
  }
  for (; c < cols; ++c) {
    double acc = y[c];
    for (std::size_t r = 0; r < rows; ++r) acc += x[r] * m[r * cols + c];
    y[c] = acc;
  }
}

}  // namespace gboc::kernels::avx2
#endif
