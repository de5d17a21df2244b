#include "gboc/kmeans.hpp"

#include <algorithm>
#include <limits>

#include "gboc/error.hpp"
#include "gboc/kernels.hpp"

namespace gboc {

std::pair<std::size_t, double> closest_row(const Matrix& centroids, std::span<const double> x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.rows; ++j) {
    const double d = kernels::squared_distance(x, centroids.row(j));
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return {best, best_d};
}

namespace {

Matrix plus_plus_init(const Matrix& data, std::size_t k, Rng& rng) {
  const std::size_t n = data.rows;
  Matrix centroids(k, data.cols);
  std::vector<bool> taken(n, false);
  std::size_t first = static_cast<std::size_t>(uniform_index(rng, n));
  std::copy(data.row(first).begin(), data.row(first).end(), centroids.row(0).begin());
  taken[first] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = kernels::squared_distance(data.row(i), centroids.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        // Rounding at the tail: last point with positive weight.
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Every point coincides with a chosen centroid.
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (!taken[i]) pick = i;
      }
      if (pick == n) pick = 0;
    }
    taken[pick] = true;
    std::copy(data.row(pick).begin(), data.row(pick).end(), centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], kernels::squared_distance(data.row(i), centroids.row(c)));
    }
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const Matrix& data, std::size_t k, Rng& rng, std::size_t max_iter) {
  if (data.rows == 0 || k == 0) throw Error(ErrorCode::BadParams, "k-means needs data and k >= 1");
  const std::size_t n = data.rows;
  const std::size_t dim = data.cols;
  k = std::min(k, n);

  KMeansResult res;
  res.centroids = plus_plus_init(data, k, rng);
  res.assignment.assign(n, std::numeric_limits<std::size_t>::max());
  res.counts.assign(k, 0);

  std::vector<double> dist(n, 0.0);
  bool reseeded = false;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto [j, d] = closest_row(res.centroids, data.row(i));
      dist[i] = d;
      if (res.assignment[i] != j) {
        res.assignment[i] = j;
        changed = true;
      }
    }
    res.iterations = iter + 1;
    if (!changed && !reseeded) break;
    reseeded = false;

    std::fill(res.counts.begin(), res.counts.end(), 0);
    Matrix sums(k, dim);
    for (std::size_t i = 0; i < n; ++i) {
      ++res.counts[res.assignment[i]];
      kernels::axpy(1.0, data.row(i), sums.row(res.assignment[i]));
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (res.counts[j] == 0) continue;
      const double inv = 1.0 / static_cast<double>(res.counts[j]);
      for (std::size_t c = 0; c < dim; ++c) res.centroids(j, c) = sums(j, c) * inv;
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (res.counts[j] != 0) continue;
      std::size_t far = n;
      double far_d = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (res.counts[res.assignment[i]] > 1 && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      if (far == n) continue;  // nothing left to move
      --res.counts[res.assignment[far]];
      res.assignment[far] = j;
      res.counts[j] = 1;
      dist[far] = 0.0;
      reseeded = true;
      std::copy(data.row(far).begin(), data.row(far).end(), res.centroids.row(j).begin());
    }
  }

  std::fill(res.counts.begin(), res.counts.end(), 0);
  for (std::size_t a : res.assignment) ++res.counts[a];
  return res;
}

}  // namespace gboc
