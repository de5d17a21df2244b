#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gboc/matrix.hpp"
#include "gboc/random.hpp"

namespace gboc {

struct KMeansResult {
  Matrix centroids;                    // k x dim; rows of empty clusters keep their last position
  std::vector<std::size_t> assignment;  // per input row
  std::vector<std::size_t> counts;     // per centroid
  std::size_t iterations = 0;
};

// Seeded k-means++ then Lloyd iterations until assignments stop changing or
// max_iter is reached. Assignment ties go to the lower centroid index. A
// cluster that empties is reseeded at the point farthest from its centroid.
KMeansResult kmeans(const Matrix& data, std::size_t k, Rng& rng, std::size_t max_iter = 100);

// Index of the closest row of `centroids` (ties -> lowest index) and the
// squared distance to it.
std::pair<std::size_t, double> closest_row(const Matrix& centroids, std::span<const double> x);

}  // namespace gboc
