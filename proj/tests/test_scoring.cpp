#include <gtest/gtest.h>

#include <cmath>

#include "gboc/error.hpp"
#include "gboc/granular.hpp"
#include "gboc/scoring.hpp"
#include "gboc/trainer.hpp"
#include "test_util.hpp"

using namespace gboc;
using gboc::testing::TempDir;

namespace {

GbocModel tiny_model(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.window = 4;
  cfg.layers = 1;
  cfg.hidden = 4;
  cfg.decoder_width = 4;
  cfg.seed = seed;
  return train(synth_scenario(ScenarioKind::Clean, 300, seed).train, cfg).model;
}

double brute_score(const Matrix& centers, std::span<const double> z) {
  double best = INFINITY;
  for (std::size_t c = 0; c < centers.rows; ++c) {
    double s = 0;
    for (std::size_t k = 0; k < centers.cols; ++k) s += (z[k] - centers(c, k)) * (z[k] - centers(c, k));
    best = std::min(best, std::sqrt(s));
  }
  return best;
}

}  // namespace

TEST(Points, OverlappingWindowsAverage) {
  const std::vector<double> scores{0, 3, 6, 9};
  const std::vector<std::size_t> starts{0, 1, 2, 3};
  const auto p = windows_to_points(scores, starts, 3, 6);
  const std::vector<double> expected{0, 1.5, 3, 6, 7.5, 9};
  for (std::size_t t = 0; t < 6; ++t) EXPECT_NEAR(p[t], expected[t], 1e-15);
}

TEST(Points, DisjointWindowsAndUncoveredTail) {
  const std::vector<double> scores{1, 2};
  const std::vector<std::size_t> starts{0, 3};
  EXPECT_EQ(windows_to_points(scores, starts, 3, 6), (std::vector<double>{1, 1, 1, 2, 2, 2}));
  EXPECT_EQ(windows_to_points(scores, starts, 3, 8), (std::vector<double>{1, 1, 1, 2, 2, 2, 2, 2}));
  // Gap between covered stretches: the earlier neighbour wins a tie.
  const std::vector<std::size_t> gapped{0, 4};
  EXPECT_EQ(windows_to_points(scores, gapped, 2, 6), (std::vector<double>{1, 1, 1, 2, 2, 2}));
  const std::vector<double> constant(5, 0.7);
  const std::vector<std::size_t> every{0, 1, 2, 3, 4};
  for (double v : windows_to_points(constant, every, 4, 8)) EXPECT_DOUBLE_EQ(v, 0.7);
}

TEST(Threshold, Examples) {
  const std::vector<double> flat(10, 2.0);
  const auto a = threshold_3sigma(flat);
  EXPECT_EQ(a.threshold, 2.0);
  EXPECT_EQ(std::count(a.flags.begin(), a.flags.end(), 1), 0);

  std::vector<double> spike(100, 0.0);
  spike[42] = 100.0;
  const auto b = threshold_3sigma(spike);
  EXPECT_NEAR(b.threshold, 1.0 + 3.0 * std::sqrt(99.0), 1e-12);
  EXPECT_EQ(std::count(b.flags.begin(), b.flags.end(), 1), 1);
  EXPECT_EQ(b.flags[42], 1);

  const std::vector<double> small{0, 0, 0, 0, 100};
  const auto c = threshold_3sigma(small);
  EXPECT_NEAR(c.threshold, 140.0, 1e-12);
  EXPECT_EQ(std::count(c.flags.begin(), c.flags.end(), 1), 0);
  EXPECT_EQ(apply_threshold(small, c.threshold), c.flags);
}

TEST(Score, MatchesExhaustiveScan) {
  const auto model = tiny_model(3);
  const auto series = apply_normalizer(synth_scenario(ScenarioKind::Noise, 600, 5).test, model.norm);
  const auto ws = make_windows(series, model.window_len, 1);
  const auto scores = score_windows(model, ws);
  ASSERT_EQ(scores.size(), ws.size());
  for (std::size_t i = 0; i < 500; ++i) {
    const auto z = encode(model.net.encoder, ws.windows.row(i));
    EXPECT_NEAR(scores[i], brute_score(model.centers, z), 1e-12);
    EXPECT_GE(scores[i], 0.0);
  }
}

TEST(Score, LatentAtCenterScoresZeroAndMoreCentersNeverHurt) {
  auto model = tiny_model(4);
  const auto series = apply_normalizer(synth_scenario(ScenarioKind::Clean, 300, 6).test, model.norm);
  const auto ws = make_windows(series, model.window_len, 1);
  const auto before = score_windows(model, ws);
  const auto z = encode(model.net.encoder, ws.windows.row(17));
  model.centers.values.insert(model.centers.values.end(), z.begin(), z.end());
  ++model.centers.rows;
  model.radii.push_back(0.0);
  model.member_counts.push_back(1);
  const auto after = score_windows(model, ws);
  EXPECT_EQ(after[17], 0.0);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_LE(after[i], before[i]);
}

TEST(Score, ShapeMismatchRejected) {
  const auto model = tiny_model(5);
  TimeSeries two;
  two.values = Matrix(50, 2);
  try {
    score_windows(model, make_windows(two, model.window_len, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ModelMismatch);
  }
}

TEST(Detect, ReportIsConsistentAndDeterministic) {
  TempDir dir;
  const auto model = tiny_model(6);
  const auto test = synth_scenario(ScenarioKind::Clean, 400, 6).test;
  const auto report = detect(model, test);
  ASSERT_EQ(report.point_scores.size(), 400u);
  EXPECT_EQ(apply_threshold(report.point_scores, report.threshold), report.flags);
  write_report_csv(report, test.labels, dir.file("a.csv"));
  write_report_csv(detect(model, test), test.labels, dir.file("b.csv"));
  EXPECT_EQ(gboc::testing::read_file(dir.file("a.csv")), gboc::testing::read_file(dir.file("b.csv")));

  const auto table = read_report_csv(dir.file("a.csv"));
  EXPECT_EQ(table.scores, report.point_scores);
  EXPECT_EQ(table.flags, report.flags);
  EXPECT_EQ(table.labels, test.labels);

  write_report_csv(report, test.labels, dir.file("c.csv"), true);
  const auto raw = read_report_csv(dir.file("c.csv"));
  EXPECT_EQ(raw.scores, report.point_scores);
  EXPECT_FALSE(raw.flags);
}

TEST(Detect, ValidationSeriesSetsThreshold) {
  const auto model = tiny_model(7);
  const auto sc = synth_scenario(ScenarioKind::Clean, 400, 7);
  const auto self = detect(model, sc.test);
  const auto val = detect(model, sc.test, &sc.train);
  const auto train_scores = detect(model, sc.train).point_scores;
  EXPECT_EQ(val.threshold, threshold_3sigma(train_scores).threshold);
  EXPECT_EQ(val.point_scores, self.point_scores);
}
