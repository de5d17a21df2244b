#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "gboc/model.hpp"
#include "gboc/tsdata.hpp"

namespace gboc {

struct AnomalyReport {
  std::vector<double> window_scores;
  std::vector<double> point_scores;
  double threshold = 0.0;
  std::vector<std::uint8_t> flags;  // flags[t] = point_scores[t] > threshold
};

// Distance from each window's latent to the nearest retained center. `ws`
// must already be normalized with the model's statistics.
std::vector<double> score_windows(const GbocModel& model, const WindowSet& ws);

// Mean score of the windows covering each timestep; uncovered timesteps copy
// the nearest covered one (the earlier one on ties).
std::vector<double> windows_to_points(std::span<const double> window_scores, std::span<const std::size_t> starts,
                                      std::size_t window_len, std::size_t length);

struct ThresholdResult {
  double threshold = 0.0;
  std::vector<std::uint8_t> flags;
};

// mean + 3 * population std; flags use a strict comparison.
ThresholdResult threshold_3sigma(std::span<const double> scores);
std::vector<std::uint8_t> apply_threshold(std::span<const double> scores, double threshold);

// Normalize, window, score and threshold a raw series. The threshold is fit
// on the scored series itself unless a validation series is given.
AnomalyReport detect(const GbocModel& model, const TimeSeries& series,
                     const TimeSeries* threshold_series = nullptr);

// Columns: t,point_score,flag[,label]; with scores_only: t,point_score.
void write_report_csv(const AnomalyReport& report, const std::optional<std::vector<std::uint8_t>>& labels,
                      const std::filesystem::path& path, bool scores_only = false);

struct ReportTable {
  std::vector<double> scores;
  std::optional<std::vector<std::uint8_t>> flags;
  std::optional<std::vector<std::uint8_t>> labels;
};

ReportTable read_report_csv(const std::filesystem::path& path);

}  // namespace gboc
