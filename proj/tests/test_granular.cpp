#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "gboc/error.hpp"
#include "gboc/granular.hpp"
#include "gboc/kmeans.hpp"
#include "test_util.hpp"

using namespace gboc;
using gboc::testing::random_matrix;

namespace {

Matrix column(std::vector<double> v) {
  Matrix m(v.size(), 1);
  m.values = std::move(v);
  return m;
}

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

GbSet with_radii(std::vector<double> radii) {
  GbSet set;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    GranularBall b;
    b.center = {static_cast<double>(i)};
    b.radius = radii[i];
    b.members = {i};
    set.balls.push_back(b);
  }
  return set;
}

void expect_partition(const GbSet& set, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& b : set.balls) {
    EXPECT_FALSE(b.members.empty());
    for (auto m : b.members) ++seen.at(m);
  }
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(seen[i], 1) << "index " << i;
}

Nearest brute_nearest(const Matrix& c, std::span<const double> z) {
  Nearest best{0, INFINITY};
  for (std::size_t j = 0; j < c.rows; ++j) {
    double s = 0;
    for (std::size_t k = 0; k < c.cols; ++k) s += (z[k] - c(j, k)) * (z[k] - c(j, k));
    if (std::sqrt(s) < best.distance) best = {j, std::sqrt(s)};
  }
  return best;
}

}  // namespace

TEST(Ball, DistributionMeasureExamples) {
  const auto one = make_ball(column({3.0}), {0});
  EXPECT_EQ(dm(one), 0.0);
  EXPECT_EQ(one.radius, 0.0);

  Matrix two(2, 2);
  two.values = {0, 0, 0, 2};
  const auto b2 = make_ball(two, {0, 1});
  EXPECT_EQ(b2.center, (std::vector<double>{0, 1}));
  EXPECT_EQ(b2.sum_dist, 2.0);
  EXPECT_EQ(dm(b2), 1.0);

  const auto b4 = make_ball(column({0, 1, 10, 11}), iota_n(4));
  EXPECT_EQ(b4.center[0], 5.5);
  EXPECT_NEAR(b4.sum_dist, 20.0, 1e-12);
  EXPECT_NEAR(dm(b4), 5.0, 1e-12);
  EXPECT_NEAR(b4.radius, 5.5, 1e-12);

  EXPECT_THROW(make_ball(two, {}), Error);
}

TEST(Split, DefaultChildRuleAcceptsPairs) {
  const auto x = column({0, 1, 10, 11});
  const auto ball = make_ball(x, iota_n(4));
  for (std::size_t s_min : {2u, 3u}) {
    const auto out = try_split(ball, x, s_min);
    ASSERT_TRUE(out.split);
    EXPECT_NEAR(out.dm_parent, 5.0, 1e-12);
    EXPECT_NEAR(out.dm_weighted, 0.5, 1e-12);
    auto a = out.first.members, b = out.second.members;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(b, (std::vector<std::size_t>{2, 3}));
    EXPECT_NEAR(dm(out.first), 0.5, 1e-12);
    EXPECT_NEAR(dm(out.second), 0.5, 1e-12);
  }
}

TEST(Split, MinSupportRuleKeepsSmallChildren) {
  const auto x = column({0, 1, 10, 11});
  const auto ball = make_ball(x, iota_n(4));
  const auto keep = try_split(ball, x, 3, ChildSupport::MinSupport);
  EXPECT_FALSE(keep.split);
  EXPECT_NEAR(keep.dm_weighted, 0.5, 1e-12);
  EXPECT_TRUE(try_split(ball, x, 2, ChildSupport::MinSupport).split);
}

TEST(Split, NoSplitAtOrBelowMinimumSize) {
  const auto x = column({0, 1, 10, 11});
  EXPECT_FALSE(try_split(make_ball(x, iota_n(4)), x, 4).split);
}

TEST(Split, IdenticalPointsKeep) {
  const auto x = column(std::vector<double>(9, 1.5));
  const auto out = try_split(make_ball(x, iota_n(9)), x, 8);
  EXPECT_FALSE(out.split);
  EXPECT_EQ(out.dm_parent, 0.0);
  EXPECT_EQ(out.dm_weighted, 0.0);
}

TEST(Generate, SinglePoint) {
  const auto set = generate(column({4.0}), {});
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.balls[0].radius, 0.0);
  EXPECT_EQ(dm(set.balls[0]), 0.0);
}

TEST(Generate, InitialBallCountIsFloorSqrtN) {
  auto rng = make_rng(1, 0);
  GenerationTrace trace;
  generate(random_matrix(64, 2, rng), {}, &trace);
  EXPECT_EQ(trace.initial_balls, 8u);
  generate(random_matrix(80, 2, rng), {}, &trace);
  EXPECT_EQ(trace.initial_balls, 8u);
}

TEST(Generate, SeparatedBlobsNeverMix) {
  auto rng = make_rng(2, 0);
  Matrix x(64, 1);
  for (std::size_t i = 0; i < 64; ++i) x(i, 0) = (i < 32 ? 0.0 : 100.0) + uniform(rng, -0.1, 0.1);
  const auto set = generate(x, {});
  expect_partition(set, 64);
  for (const auto& b : set.balls) {
    const bool low = b.members.front() < 32;
    for (auto m : b.members) EXPECT_EQ(m < 32, low);
  }
}

TEST(Generate, PropertiesOnRandomData) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    auto rng = make_rng(seed, 5);
    const std::size_t n = 1 + uniform_index(rng, 300);
    const std::size_t d = 1 + uniform_index(rng, 6);
    const auto x = random_matrix(n, d, rng, -3.0, 3.0);
    GenerationTrace trace;
    const auto set = generate(x, {8, seed}, &trace);
    expect_partition(set, n);
    EXPECT_EQ(set.size(), trace.initial_balls + trace.accepted_splits.size());
    for (auto [w, p] : trace.accepted_splits) EXPECT_LT(w, p);
    for (const auto& b : set.balls) {
      const auto ref = make_ball(x, b.members);
      for (std::size_t k = 0; k < d; ++k) EXPECT_NEAR(b.center[k], ref.center[k], 1e-12);
      EXPECT_NEAR(b.radius, ref.radius, 1e-12);
      // A surviving ball larger than s_min could not be split further.
      if (b.size() > 8) EXPECT_FALSE(try_split(b, x, 8).split);
    }
    EXPECT_EQ(generate(x, {8, seed}).balls.size(), set.size());
  }
}

TEST(Prune, ExampleThreshold) {
  const std::vector<double> radii{1, 1, 2, 10};
  EXPECT_EQ(pruning_threshold(radii, 2.0), 7.0);
  const auto out = prune(with_radii(radii), 2.0);
  EXPECT_TRUE(out.pruned);
  ASSERT_EQ(out.size(), 3u);
  for (const auto& b : out.balls) EXPECT_LE(b.radius, 7.0);
}

TEST(Prune, EqualRadiiKeepEverything) {
  EXPECT_EQ(prune(with_radii({0.5, 0.5, 0.5}), 2.0).size(), 3u);
  EXPECT_EQ(pruning_threshold(std::vector<double>{3.0}, 1.0), 3.0);
}

TEST(Prune, AllRemovedKeepsSmallest) {
  ::testing::internal::CaptureStderr();
  const auto out = prune(with_radii({4, 3, 5}), 0.1);
  EXPECT_NE(::testing::internal::GetCapturedStderr().find("warning"), std::string::npos);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.balls[0].radius, 3.0);
  EXPECT_THROW(prune(with_radii({1}), 0.0), Error);
}

TEST(Prune, SoundAndIdempotent) {
  auto rng = make_rng(3, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> radii(1 + uniform_index(rng, 30));
    for (double& r : radii) r = std::exp(uniform(rng, -2.0, 3.0));
    const double mu = uniform(rng, 0.5, 3.0);
    const double th = pruning_threshold(radii, mu);
    const auto once = prune(with_radii(radii), mu);
    const auto kept = std::count_if(radii.begin(), radii.end(), [&](double r) { return r <= th; });
    if (kept > 0) {
      EXPECT_EQ(once.size(), static_cast<std::size_t>(kept));
      for (const auto& b : once.balls) EXPECT_LE(b.radius, th);
    }
    const auto twice = prune(once, mu);
    ASSERT_EQ(twice.size(), once.size());
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(twice.balls[i].radius, once.balls[i].radius);
  }
}

TEST(Nearest, ExamplesAndTies) {
  const auto c = column({-1.0, 1.0});
  const auto n = nearest_center(c, std::vector<double>{0.0});
  EXPECT_EQ(n.index, 0u);
  EXPECT_EQ(n.distance, 1.0);
  const auto exact = nearest_center(c, std::vector<double>{1.0});
  EXPECT_EQ(exact.index, 1u);
  EXPECT_EQ(exact.distance, 0.0);
  EXPECT_THROW(nearest_center(Matrix(0, 1), std::vector<double>{0.0}), Error);
  EXPECT_THROW(nearest_center(c, std::vector<double>{0.0, 1.0}), Error);
}

TEST(Nearest, MatchesExhaustiveScan) {
  auto rng = make_rng(4, 0);
  for (int q = 0; q < 1000; ++q) {
    const std::size_t d = 1 + uniform_index(rng, 8);
    const auto c = random_matrix(5, d, rng);
    const auto z = random_matrix(1, d, rng);
    const auto got = nearest_center(c, z.row(0));
    const auto ref = brute_nearest(c, z.row(0));
    EXPECT_EQ(got.index, ref.index);
    EXPECT_NEAR(got.distance, ref.distance, 1e-12);
  }
}

TEST(Coverage, Examples) {
  const auto x = column({0.0, 1.0});
  EXPECT_NEAR(coverage_rate(x, column({0.0})), 50.0, 1e-12);
  EXPECT_NEAR(coverage_rate(x, x), 100.0, 1e-12);
  EXPECT_THROW(coverage_rate(column({2.0, 2.0}), column({2.0})), Error);
}

TEST(Coverage, PrunedBallsCoverBlobsBetterThanTwelveMeans) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto x = gboc::testing::two_blobs(seed);
    const auto balls = prune(generate(x, {8, seed}), 2.0);
    EXPECT_LE(balls.size(), 64u);
    EXPECT_GE(coverage_rate(x, centers_of(balls)), coverage_rate(x, centers_of(kmeans_balls(x, 12, seed))));
  }
}

TEST(KMeans, LloydConvergesOnSeparatedGroups) {
  const auto x = column({0, 0.1, 0.2, 10, 10.1, 10.2});
  auto rng = make_rng(5, 0);
  const auto r = kmeans(x, 2, rng);
  EXPECT_EQ(r.assignment[0], r.assignment[2]);
  EXPECT_NE(r.assignment[0], r.assignment[3]);
  EXPECT_EQ(r.counts[0] + r.counts[1], 6u);
  EXPECT_LE(r.iterations, 100u);
}

TEST(KMeans, TiesGoToLowerIndex) {
  const auto [idx, d2] = closest_row(column({-1.0, 1.0}), std::vector<double>{0.0});
  EXPECT_EQ(idx, 0u);
  EXPECT_EQ(d2, 1.0);
}
