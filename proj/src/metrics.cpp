#include "gboc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gboc/error.hpp"

namespace gboc {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_lengths(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::ShapeMismatch, "scores (" + std::to_string(scores.size()) + ") and labels (" +
                                              std::to_string(labels.size()) + ") differ in length");
  }
}

std::size_t count_anomalies(std::span<const std::uint8_t> labels) {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](auto v) { return v != 0; }));
}

// near[t] = some anomaly lies within delta of t.
std::vector<std::uint8_t> near_anomaly(std::span<const std::uint8_t> labels, std::size_t delta) {
  const std::size_t n = labels.size();
  std::vector<std::size_t> prefix(n + 1, 0);
  for (std::size_t t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + (labels[t] ? 1 : 0);
  std::vector<std::uint8_t> near(n, 0);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t >= delta ? t - delta : 0;
    const std::size_t hi = std::min(n, t + delta + 1);
    near[t] = prefix[hi] > prefix[lo];
  }
  return near;
}

// Cumulative (predicted, true-positive) counts after each group of equal
// scores, visiting scores from high to low. Group k corresponds to the
// threshold just below the k-th largest distinct score.
struct SweepPoint {
  std::size_t predicted;
  std::size_t tp;
};

std::vector<SweepPoint> sweep(std::span<const double> scores, std::span<const std::uint8_t> near) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<SweepPoint> out;
  std::size_t pred = 0, tp = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    ++pred;
    tp += near[idx[k]];
    if (k + 1 == idx.size() || scores[idx[k + 1]] != scores[idx[k]]) out.push_back({pred, tp});
  }
  return out;
}

double trapezoid(const std::vector<std::pair<double, double>>& pts) {
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) * 0.5;
  }
  return area;
}

double mean_over(std::span<const std::size_t> deltas, auto&& per_delta) {
  if (deltas.empty()) throw Error(ErrorCode::BadParams, "empty tolerance set");
  double sum = 0.0;
  for (std::size_t d : deltas) sum += per_delta(d);
  return sum / static_cast<double>(deltas.size());
}

}  // namespace

TolerantPr tolerant_pr(std::span<const double> scores, std::span<const std::uint8_t> labels, std::size_t delta,
                       double tau) {
  check_lengths(scores, labels);
  const std::size_t anomalies = count_anomalies(labels);
  if (anomalies == 0) throw Error(ErrorCode::NoAnomalies, "recall undefined without labelled anomalies");
  const auto near = near_anomaly(labels, delta);
  TolerantPr r;
  for (std::size_t t = 0; t < scores.size(); ++t) {
    if (scores[t] > tau) {
      ++r.predicted;
      r.true_positives += near[t];
    }
  }
  r.precision = r.predicted ? static_cast<double>(r.true_positives) / static_cast<double>(r.predicted) : kNaN;
  r.recall_raw = static_cast<double>(r.true_positives) / static_cast<double>(anomalies);
  r.recall = static_cast<double>(std::min(r.true_positives, anomalies)) / static_cast<double>(anomalies);
  return r;
}

double auc_pr_tolerant(std::span<const double> scores, std::span<const std::uint8_t> labels, std::size_t delta) {
  check_lengths(scores, labels);
  const std::size_t anomalies = count_anomalies(labels);
  if (anomalies == 0) throw Error(ErrorCode::NoAnomalies, "VUS-PR needs at least one anomaly");
  const auto points = sweep(scores, near_anomaly(labels, delta));
  std::vector<std::pair<double, double>> curve;  // (recall, precision)
  curve.reserve(points.size() + 1);
  for (const auto& p : points) {
    const double precision = static_cast<double>(p.tp) / static_cast<double>(p.predicted);
    const double recall = static_cast<double>(std::min(p.tp, anomalies)) / static_cast<double>(anomalies);
    curve.emplace_back(recall, precision);
  }
  // Precision at recall 0 is carried from the first (smallest-recall) point.
  curve.insert(curve.begin(), {0.0, curve.front().second});
  return trapezoid(curve);
}

double auc_roc_tolerant(std::span<const double> scores, std::span<const std::uint8_t> labels, std::size_t delta) {
  check_lengths(scores, labels);
  const std::size_t anomalies = count_anomalies(labels);
  const std::size_t normals = labels.size() - anomalies;
  if (anomalies == 0 || normals == 0) {
    throw Error(ErrorCode::DegenerateLabels, "VUS-ROC needs both anomalous and normal points");
  }
  const auto points = sweep(scores, near_anomaly(labels, delta));
  std::vector<std::pair<double, double>> curve;  // (fpr, tpr)
  curve.reserve(points.size() + 2);
  curve.emplace_back(0.0, 0.0);
  for (const auto& p : points) {
    const double tpr = static_cast<double>(std::min(p.tp, anomalies)) / static_cast<double>(anomalies);
    const double fpr = static_cast<double>(p.predicted - p.tp) / static_cast<double>(normals);
    curve.emplace_back(fpr, tpr);
  }
  curve.emplace_back(1.0, 1.0);
  return trapezoid(curve);
}

double vus_pr(std::span<const double> scores, std::span<const std::uint8_t> labels,
              std::span<const std::size_t> deltas) {
  return mean_over(deltas, [&](std::size_t d) { return auc_pr_tolerant(scores, labels, d); });
}

double vus_roc(std::span<const double> scores, std::span<const std::uint8_t> labels,
               std::span<const std::size_t> deltas) {
  return mean_over(deltas, [&](std::size_t d) { return auc_roc_tolerant(scores, labels, d); });
}

std::vector<Interval> label_intervals(std::span<const std::uint8_t> labels) {
  std::vector<Interval> out;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (!labels[t]) continue;
    if (!out.empty() && out.back().last + 1 == t) {
      out.back().last = t;
    } else {
      out.push_back({t, t});
    }
  }
  return out;
}

Affiliation affiliation(std::vector<std::size_t> predicted, std::span<const Interval> truth, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::BadParams, "affiliation bandwidth must be positive");
  Affiliation a;
  std::sort(predicted.begin(), predicted.end());
  predicted.erase(std::unique(predicted.begin(), predicted.end()), predicted.end());
  if (predicted.empty() || truth.empty()) {
    a.precision = predicted.empty() ? kNaN : 0.0;
    a.recall = truth.empty() ? kNaN : 0.0;
    a.f1 = kNaN;
    return a;
  }
  std::vector<Interval> iv(truth.begin(), truth.end());
  std::sort(iv.begin(), iv.end(), [](const Interval& x, const Interval& y) { return x.first < y.first; });
  const double two_s2 = 2.0 * sigma * sigma;
  auto kernel = [&](double d) { return std::exp(-(d * d) / two_s2); };

  double psum = 0.0;
  for (std::size_t t : predicted) {
    // First interval starting after t; candidates are it and its predecessor.
    const auto it = std::upper_bound(iv.begin(), iv.end(), t, [](std::size_t v, const Interval& x) { return v < x.first; });
    double best = std::numeric_limits<double>::infinity();
    if (it != iv.end()) best = static_cast<double>(it->first - t);
    if (it != iv.begin()) {
      const Interval& p = *(it - 1);
      best = std::min(best, t <= p.last ? 0.0 : static_cast<double>(t - p.last));
    }
    psum += kernel(best);
  }

  double rsum = 0.0;
  std::size_t anomalies = 0;
  for (const auto& x : iv) {
    for (std::size_t t = x.first; t <= x.last; ++t) {
      const auto it = std::lower_bound(predicted.begin(), predicted.end(), t);
      double best = std::numeric_limits<double>::infinity();
      if (it != predicted.end()) best = static_cast<double>(*it - t);
      if (it != predicted.begin()) best = std::min(best, static_cast<double>(t - *(it - 1)));
      rsum += kernel(best);
      ++anomalies;
    }
  }

  a.precision = psum / static_cast<double>(predicted.size());
  a.recall = rsum / static_cast<double>(anomalies);
  a.f1 = a.precision + a.recall > 0.0 ? 2.0 * a.precision * a.recall / (a.precision + a.recall) : 0.0;
  return a;
}

Affiliation affiliation(std::span<const std::uint8_t> flags, std::span<const std::uint8_t> labels, double sigma) {
  if (flags.size() != labels.size()) throw Error(ErrorCode::ShapeMismatch, "flags and labels differ in length");
  std::vector<std::size_t> predicted;
  for (std::size_t t = 0; t < flags.size(); ++t) {
    if (flags[t]) predicted.push_back(t);
  }
  const auto iv = label_intervals(labels);
  return affiliation(std::move(predicted), iv, sigma);
}

EvalScores evaluate(std::span<const double> scores, std::span<const std::uint8_t> flags,
                    std::span<const std::uint8_t> labels, std::span<const std::size_t> deltas, double sigma) {
  EvalScores e;
  for (std::size_t d : deltas) e.per_delta.push_back({d, auc_pr_tolerant(scores, labels, d), auc_roc_tolerant(scores, labels, d)});
  if (deltas.empty()) throw Error(ErrorCode::BadParams, "empty tolerance set");
  for (const auto& r : e.per_delta) {
    e.vus_pr += r.auc_pr;
    e.vus_roc += r.auc_roc;
  }
  e.vus_pr /= static_cast<double>(deltas.size());
  e.vus_roc /= static_cast<double>(deltas.size());
  const Affiliation a = affiliation(flags, labels, sigma);
  e.affiliation_precision = a.precision;
  e.affiliation_recall = a.recall;
  e.affiliation_f1 = a.f1;
  return e;
}

}  // namespace gboc
