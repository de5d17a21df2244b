#include "kernels_impl.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace gboc::kernels::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    acc0 = vfmaq_f64(acc0, d0, d0);
    acc1 = vfmaq_f64(acc1, d1, d1);
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void vecmat(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
  std::size_t c = 0;
  for (; c + 8 <= cols; c += 8) {
    float64x2_t y0 = vld1q_f64(y + c);
    float64x2_t y1 = vld1q_f64(y + c + 2);
    float64x2_t y2 = vld1q_f64(y + c + 4);
    float64x2_t y3 = vld1q_f64(y + c + 6);
    for (std::size_t r = 0; r < rows; ++r) {
      const float64x2_t xr = vdupq_n_f64(x[r]);
      const double* mr = m + r * cols + c;
      y0 = vfmaq_f64(y0, xr, vld1q_f64(mr));
      y1 = vfmaq_f64(y1, xr, vld1q_f64(mr + 2));
      y2 = vfmaq_f64(y2, xr, vld1q_f64(mr + 4));
      y3 = vfmaq_f64(y3, xr, vld1q_f64(mr + 6));
    }
    vst1q_f64(y + c, y0);
    vst1q_f64(y + c + 2, y1);
    vst1q_f64(y + c + 4, y2);
    vst1q_f64(y + c + 6, y3);
  }
  for (; c < cols; ++c) {
    double acc = y[c];
    for (std::size_t r = 0; r < rows; ++r) acc += x[r] * m[r * cols + c];
    y[c] = acc;
  }
}

}  // namespace gboc::kernels::neon
#endif
