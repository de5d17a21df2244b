#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gboc {

// Tolerance-aware precision/recall at one threshold. A prediction (score > tau)
// counts as a true positive when some labelled anomaly lies within delta
// steps of it. Recall uses the true-positive count clamped to the number of
// anomalies; recall_raw is the unclamped ratio.
struct TolerantPr {
  double precision = 0.0;  // NaN when nothing is predicted
  double recall = 0.0;
  double recall_raw = 0.0;
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
};

TolerantPr tolerant_pr(std::span<const double> scores, std::span<const std::uint8_t> labels, std::size_t delta,
                       double tau);

// Area under the tolerant precision-recall curve at one delta, sweeping the
// threshold over every distinct score.
double auc_pr_tolerant(std::span<const double> scores, std::span<const std::uint8_t> labels, std::size_t delta);
// Area under the tolerant ROC curve at one delta.
double auc_roc_tolerant(std::span<const double> scores, std::span<const std::uint8_t> labels, std::size_t delta);

// Averages of the per-delta areas.
double vus_pr(std::span<const double> scores, std::span<const std::uint8_t> labels, std::span<const std::size_t> deltas);
double vus_roc(std::span<const double> scores, std::span<const std::uint8_t> labels, std::span<const std::size_t> deltas);

struct Interval {
  std::size_t first = 0;  // inclusive
  std::size_t last = 0;   // inclusive
};

// Maximal runs of 1s.
std::vector<Interval> label_intervals(std::span<const std::uint8_t> labels);

struct Affiliation {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;  // NaN when nothing is predicted or there are no anomalies
};

// Gaussian-kernel affiliation between predicted timestamps and ground-truth
// intervals. Order and duplicates of `predicted` do not matter.
Affiliation affiliation(std::vector<std::size_t> predicted, std::span<const Interval> truth, double sigma);
Affiliation affiliation(std::span<const std::uint8_t> flags, std::span<const std::uint8_t> labels, double sigma);

struct DeltaRow {
  std::size_t delta = 0;
  double auc_pr = 0.0;
  double auc_roc = 0.0;
};

struct EvalScores {
  double vus_pr = 0.0;
  double vus_roc = 0.0;
  double affiliation_f1 = 0.0;
  double affiliation_precision = 0.0;
  double affiliation_recall = 0.0;
  std::vector<DeltaRow> per_delta;
};

inline const std::vector<std::size_t> kDefaultDeltas = {0, 1, 2, 3, 4};

EvalScores evaluate(std::span<const double> scores, std::span<const std::uint8_t> flags,
                    std::span<const std::uint8_t> labels, std::span<const std::size_t> deltas, double sigma);

}  // namespace gboc
