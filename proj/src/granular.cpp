#include "gboc/granular.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <string>

#include "gboc/error.hpp"
#include "gboc/kernels.hpp"
#include "gboc/kmeans.hpp"
#include "gboc/random.hpp"

namespace gboc {
namespace {

std::size_t isqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

bool same_point(const Matrix& latents, std::size_t a, std::size_t b) {
  return std::equal(latents.row(a).begin(), latents.row(a).end(), latents.row(b).begin());
}

// 2-means over a ball's members from the farthest-pair seeds. Returns false
// when all members coincide.
bool two_means(const GranularBall& ball, const Matrix& latents, std::vector<std::size_t>& left,
               std::vector<std::size_t>& right) {
  const auto& m = ball.members;
  std::size_t seed_a = m.front();
  double far = -1.0;
  for (std::size_t idx : m) {
    const double d = kernels::squared_distance(latents.row(idx), ball.center);
    if (d > far) {
      far = d;
      seed_a = idx;
    }
  }
  std::size_t seed_b = seed_a;
  far = 0.0;
  for (std::size_t idx : m) {
    const double d = kernels::squared_distance(latents.row(idx), latents.row(seed_a));
    if (d > far) {
      far = d;
      seed_b = idx;
    }
  }
  if (seed_b == seed_a || same_point(latents, seed_a, seed_b)) return false;

  const std::size_t dim = latents.cols;
  Matrix cent(2, dim);
  std::copy(latents.row(seed_a).begin(), latents.row(seed_a).end(), cent.row(0).begin());
  std::copy(latents.row(seed_b).begin(), latents.row(seed_b).end(), cent.row(1).begin());

  std::vector<std::uint8_t> side(m.size(), 2);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    std::size_t count[2] = {0, 0};
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto [j, d] = closest_row(cent, latents.row(m[i]));
      (void)d;
      if (side[i] != j) {
        side[i] = static_cast<std::uint8_t>(j);
        changed = true;
      }
      ++count[j];
    }
    for (int j = 0; j < 2; ++j) {
      if (count[j] != 0) continue;
      // Empty side: reseed at the member farthest from the other centroid.
      const std::size_t other = 1 - static_cast<std::size_t>(j);
      std::size_t pick = 0;
      double best = -1.0;
      for (std::size_t i = 0; i < m.size(); ++i) {
        const double d = kernels::squared_distance(latents.row(m[i]), cent.row(other));
        if (d > best) {
          best = d;
          pick = i;
        }
      }
      side[pick] = static_cast<std::uint8_t>(j);
      ++count[j];
      --count[other];
      changed = true;
    }
    if (!changed && iter > 0) break;
    Matrix sums(2, dim);
    for (std::size_t i = 0; i < m.size(); ++i) kernels::axpy(1.0, latents.row(m[i]), sums.row(side[i]));
    for (std::size_t j = 0; j < 2; ++j) {
      const double inv = 1.0 / static_cast<double>(count[j]);
      for (std::size_t c = 0; c < dim; ++c) cent(j, c) = sums(j, c) * inv;
    }
  }

  left.clear();
  right.clear();
  for (std::size_t i = 0; i < m.size(); ++i) (side[i] == 0 ? left : right).push_back(m[i]);
  return !left.empty() && !right.empty();
}

}  // namespace

GranularBall make_ball(const Matrix& latents, std::vector<std::size_t> members) {
  if (members.empty()) throw Error(ErrorCode::EmptyBall, "ball without members");
  GranularBall b;
  b.center.assign(latents.cols, 0.0);
  for (std::size_t idx : members) kernels::axpy(1.0, latents.row(idx), b.center);
  const double inv = 1.0 / static_cast<double>(members.size());
  for (double& c : b.center) c *= inv;
  for (std::size_t idx : members) {
    const double d = std::sqrt(kernels::squared_distance(latents.row(idx), b.center));
    b.sum_dist += d;
    b.radius = std::max(b.radius, d);
  }
  b.members = std::move(members);
  return b;
}

double dm(const GranularBall& ball) {
  if (ball.members.empty()) throw Error(ErrorCode::EmptyBall, "distribution measure of an empty ball");
  return ball.sum_dist / static_cast<double>(ball.members.size());
}

SplitOutcome try_split(const GranularBall& ball, const Matrix& latents, std::size_t s_min, ChildSupport support) {
  SplitOutcome out;
  out.dm_parent = dm(ball);
  out.dm_weighted = out.dm_parent;
  if (ball.size() <= s_min) return out;

  std::vector<std::size_t> left, right;
  if (!two_means(ball, latents, left, right)) return out;

  out.first = make_ball(latents, std::move(left));
  out.second = make_ball(latents, std::move(right));
  const double n = static_cast<double>(ball.size());
  out.dm_weighted = static_cast<double>(out.first.size()) / n * dm(out.first) +
                    static_cast<double>(out.second.size()) / n * dm(out.second);
  const std::size_t min_child = support == ChildSupport::MinSupport ? s_min : 2;
  out.split = out.dm_weighted < out.dm_parent && out.first.size() >= min_child && out.second.size() >= min_child;
  return out;
}

GbSet generate(const Matrix& latents, const GenerateOptions& opts, GenerationTrace* trace) {
  if (latents.rows == 0) throw Error(ErrorCode::EmptySet, "no latent vectors to cover");
  GbSet set = kmeans_balls(latents, isqrt(latents.rows), opts.seed);
  set.s_min = opts.s_min;
  if (trace) {
    *trace = {};
    trace->initial_balls = set.size();
  }

  while (true) {
    const std::size_t before = set.size();
    for (std::size_t j = 0; j < before; ++j) {
      if (set.balls[j].size() <= opts.s_min) continue;
      SplitOutcome s = try_split(set.balls[j], latents, opts.s_min, opts.child_support);
      if (!s.split) continue;
      if (trace) trace->accepted_splits.emplace_back(s.dm_weighted, s.dm_parent);
      set.balls[j] = std::move(s.first);
      set.balls.push_back(std::move(s.second));
    }
    if (trace) ++trace->sweeps;
    if (set.size() == before) break;
  }
  return set;
}

GbSet kmeans_balls(const Matrix& latents, std::size_t k, std::uint64_t seed) {
  if (latents.rows == 0) throw Error(ErrorCode::EmptySet, "no latent vectors to cluster");
  auto rng = make_rng(seed, 0x6B6D);
  const KMeansResult km = kmeans(latents, std::max<std::size_t>(k, 1), rng);
  std::vector<std::vector<std::size_t>> groups(km.centroids.rows);
  for (std::size_t i = 0; i < km.assignment.size(); ++i) groups[km.assignment[i]].push_back(i);
  GbSet set;
  for (auto& g : groups) {
    if (!g.empty()) set.balls.push_back(make_ball(latents, std::move(g)));
  }
  return set;
}

double pruning_threshold(std::span<const double> radii, double mu) {
  if (radii.empty()) throw Error(ErrorCode::EmptySet, "no radii");
  std::vector<double> r(radii.begin(), radii.end());
  std::sort(r.begin(), r.end());
  const std::size_t n = r.size();
  const double median = n % 2 == 1 ? r[n / 2] : 0.5 * (r[n / 2 - 1] + r[n / 2]);
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);
  return mu * std::max(median, mean);
}

GbSet prune(const GbSet& set, double mu) {
  if (set.empty()) throw Error(ErrorCode::EmptySet, "nothing to prune");
  if (!(mu > 0.0)) throw Error(ErrorCode::BadParams, "mu must be positive");
  if (set.pruned) return set;
  std::vector<double> radii;
  radii.reserve(set.size());
  for (const auto& b : set.balls) radii.push_back(b.radius);
  const double r_th = pruning_threshold(radii, mu);

  GbSet out;
  out.s_min = set.s_min;
  out.mu = mu;
  out.pruned = true;
  for (const auto& b : set.balls) {
    if (b.radius <= r_th) out.balls.push_back(b);
  }
  if (out.balls.empty()) {
    const auto smallest = std::min_element(set.balls.begin(), set.balls.end(),
                                           [](const auto& a, const auto& b) { return a.radius < b.radius; });
    std::cerr << "warning: pruning threshold " << r_th << " removes every ball; keeping radius "
              << smallest->radius << '\n';
    out.balls.push_back(*smallest);
  }
  return out;
}

Matrix centers_of(const GbSet& set) {
  if (set.empty()) return {};
  Matrix c(set.size(), set.balls.front().center.size());
  for (std::size_t j = 0; j < set.size(); ++j) {
    std::copy(set.balls[j].center.begin(), set.balls[j].center.end(), c.row(j).begin());
  }
  return c;
}

Nearest nearest_center(const Matrix& centers, std::span<const double> z) {
  if (centers.rows == 0) throw Error(ErrorCode::EmptySet, "no centers");
  if (centers.cols != z.size()) throw Error(ErrorCode::ShapeMismatch, "latent and center dimensions differ");
  const auto [idx, d2] = closest_row(centers, z);
  return {idx, std::sqrt(d2)};
}

Nearest nearest_center(const GbSet& set, std::span<const double> z) {
  if (set.empty()) throw Error(ErrorCode::EmptySet, "no balls");
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t j = 0; j < set.size(); ++j) {
    const double d = kernels::squared_distance(z, set.balls[j].center);
    if (d < best.distance) best = {j, d};
  }
  best.distance = std::sqrt(best.distance);
  return best;
}

double coverage_rate(const Matrix& latents, const Matrix& centers) {
  if (centers.rows == 0) throw Error(ErrorCode::EmptySet, "no centers");
  if (latents.rows == 0) throw Error(ErrorCode::DegenerateRange, "no latent vectors");
  const auto [lo, hi] = std::minmax_element(latents.values.begin(), latents.values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) throw Error(ErrorCode::DegenerateRange, "latent coordinates span a zero range");
  double total = 0.0;
  for (std::size_t i = 0; i < latents.rows; ++i) total += nearest_center(centers, latents.row(i)).distance / range;
  return 100.0 * (1.0 - total / static_cast<double>(latents.rows));
}

}  // namespace gboc
