#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "gboc/matrix.hpp"
#include "gboc/random.hpp"

namespace gboc::testing {

// Isotropic Gaussian blobs with unit spread, centers on a circle of radius
// `separation`, points dealt to blobs round-robin.
inline Matrix blobs(std::size_t n, std::size_t blob_count, std::size_t dim, std::uint64_t seed,
                    double separation = 10.0, double spread = 1.0) {
  auto rng = make_rng(seed, 0xB10B);
  Matrix out(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i % blob_count;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(blob_count);
    for (std::size_t k = 0; k < dim; ++k) {
      double mean = 0.0;
      if (k == 0) mean = separation * std::cos(angle);
      if (k == 1) mean = separation * std::sin(angle);
      out(i, k) = mean + spread * standard_normal(rng);
    }
  }
  return out;
}

inline Matrix two_blobs(std::uint64_t seed, std::size_t n = 256) { return blobs(n, 2, 2, seed); }
inline Matrix four_blobs(std::uint64_t seed, std::size_t n = 256) { return blobs(n, 4, 2, seed); }

}  // namespace gboc::testing
