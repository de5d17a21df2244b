#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gboc/matrix.hpp"

namespace gboc {

// Center = mean of members, radius = max member distance to the center,
// sum_dist = total member distance to the center.
struct GranularBall {
  std::vector<double> center;
  double radius = 0.0;
  std::vector<std::size_t> members;
  double sum_dist = 0.0;

  std::size_t size() const noexcept { return members.size(); }
};

struct GbSet {
  std::vector<GranularBall> balls;
  bool pruned = false;
  std::size_t s_min = 8;
  double mu = 2.0;

  std::size_t size() const noexcept { return balls.size(); }
  bool empty() const noexcept { return balls.empty(); }
};

GranularBall make_ball(const Matrix& latents, std::vector<std::size_t> members);

// Distribution measure s / |GB|; lower is denser.
double dm(const GranularBall& ball);

// What a child of a split must satisfy. NonDegenerate: |child| >= 2.
// MinSupport: |child| >= s_min.
enum class ChildSupport { NonDegenerate, MinSupport };

struct SplitOutcome {
  bool split = false;
  double dm_parent = 0.0;
  double dm_weighted = 0.0;  // member-weighted child DM; equals dm_parent when 2-means was not run
  GranularBall first;
  GranularBall second;
};

// Balls with more than s_min members are split by 2-means; the split is kept
// when the weighted child DM is strictly below the parent's and both children
// meet the support rule.
SplitOutcome try_split(const GranularBall& ball, const Matrix& latents, std::size_t s_min,
                       ChildSupport support = ChildSupport::NonDegenerate);

struct GenerateOptions {
  std::size_t s_min = 8;
  std::uint64_t seed = 2024;
  ChildSupport child_support = ChildSupport::NonDegenerate;
};

struct GenerationTrace {
  std::size_t initial_balls = 0;
  std::size_t sweeps = 0;
  // (DM_w, DM) of every accepted split in order.
  std::vector<std::pair<double, double>> accepted_splits;
};

// floor(sqrt(N)) initial balls from k-means, then sweeps of try_split in
// stable index order until a sweep produces no split. A split child replaces
// its parent in place and the sibling is appended.
GbSet generate(const Matrix& latents, const GenerateOptions& opts, GenerationTrace* trace = nullptr);

// Plain k-means centers wrapped as balls (the "without granular-ball
// computing" variant): k = floor(sqrt(N)).
GbSet kmeans_balls(const Matrix& latents, std::size_t k, std::uint64_t seed);

// mu * max(median(r), mean(r)); even-length median averages the middle pair.
double pruning_threshold(std::span<const double> radii, double mu);

// Drops every ball with r > r_th. When that would drop all of them the
// smallest-radius ball is kept (and a warning is logged). A set that is
// already pruned is returned unchanged.
GbSet prune(const GbSet& set, double mu);

struct Nearest {
  std::size_t index = 0;
  double distance = 0.0;
};

Matrix centers_of(const GbSet& set);
Nearest nearest_center(const Matrix& centers, std::span<const double> z);
Nearest nearest_center(const GbSet& set, std::span<const double> z);

// 100 * (1 - mean_i(min_j ||x_i - c_j|| / (max(X) - min(X)))), with max/min
// taken over every latent coordinate.
double coverage_rate(const Matrix& latents, const Matrix& centers);

}  // namespace gboc
