#include "gboc/scoring.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "gboc/csv_format.hpp"
#include "gboc/error.hpp"
#include "gboc/granular.hpp"
#include "gboc/parallel.hpp"

namespace gboc {

std::vector<double> score_windows(const GbocModel& model, const WindowSet& ws) {
  if (model.centers.rows == 0) throw Error(ErrorCode::ModelMismatch, "model has no centers");
  if (ws.windows.cols != model.window_len * model.channels || ws.channels != model.channels) {
    throw Error(ErrorCode::ModelMismatch, "window width " + std::to_string(ws.windows.cols) +
                                              " does not match the model (" + std::to_string(model.window_len) +
                                              " x " + std::to_string(model.channels) + ")");
  }
  std::vector<double> scores(ws.size());
  parallel_for(ws.size(), [&](std::size_t i) {
    const auto z = encode(model.net.encoder, ws.windows.row(i));
    scores[i] = nearest_center(model.centers, z).distance;
  });
  return scores;
}

std::vector<double> windows_to_points(std::span<const double> window_scores, std::span<const std::size_t> starts,
                                      std::size_t window_len, std::size_t length) {
  if (window_scores.size() != starts.size()) throw Error(ErrorCode::ShapeMismatch, "scores and starts differ in length");
  std::vector<double> sum(length, 0.0);
  std::vector<std::size_t> cover(length, 0);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (starts[i] + window_len > length) throw Error(ErrorCode::ShapeMismatch, "window extends past the series");
    for (std::size_t t = starts[i]; t < starts[i] + window_len; ++t) {
      sum[t] += window_scores[i];
      ++cover[t];
    }
  }
  std::vector<double> out(length, 0.0);
  std::vector<bool> covered(length, false);
  for (std::size_t t = 0; t < length; ++t) {
    if (cover[t]) {
      out[t] = sum[t] / static_cast<double>(cover[t]);
      covered[t] = true;
    }
  }
  // Fill gaps from the nearest covered timestep on either side.
  std::vector<std::ptrdiff_t> prev(length, -1), next(length, -1);
  std::ptrdiff_t last = -1;
  for (std::size_t t = 0; t < length; ++t) {
    if (covered[t]) last = static_cast<std::ptrdiff_t>(t);
    prev[t] = last;
  }
  last = -1;
  for (std::size_t t = length; t-- > 0;) {
    if (covered[t]) last = static_cast<std::ptrdiff_t>(t);
    next[t] = last;
  }
  for (std::size_t t = 0; t < length; ++t) {
    if (covered[t]) continue;
    const auto ti = static_cast<std::ptrdiff_t>(t);
    if (prev[t] < 0 && next[t] < 0) continue;
    std::ptrdiff_t src;
    if (prev[t] < 0) src = next[t];
    else if (next[t] < 0) src = prev[t];
    else src = (ti - prev[t] <= next[t] - ti) ? prev[t] : next[t];
    out[t] = out[static_cast<std::size_t>(src)];
  }
  return out;
}

ThresholdResult threshold_3sigma(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::BadParams, "threshold needs at least one score");
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  var /= static_cast<double>(scores.size());
  ThresholdResult r;
  r.threshold = mean + 3.0 * std::sqrt(var);
  r.flags = apply_threshold(scores, r.threshold);
  return r;
}

std::vector<std::uint8_t> apply_threshold(std::span<const double> scores, double threshold) {
  std::vector<std::uint8_t> flags(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) flags[i] = scores[i] > threshold ? 1 : 0;
  return flags;
}

namespace {

std::vector<double> point_scores_of(const GbocModel& model, const TimeSeries& series, std::vector<double>* windows) {
  if (series.channels() != model.channels) {
    throw Error(ErrorCode::ModelMismatch, "series has " + std::to_string(series.channels()) +
                                              " channels, model expects " + std::to_string(model.channels));
  }
  const WindowSet ws = make_windows(apply_normalizer(series, model.norm), model.window_len, model.stride);
  auto w = score_windows(model, ws);
  auto points = windows_to_points(w, ws.starts, ws.window_len, series.length());
  if (windows) *windows = std::move(w);
  return points;
}

}  // namespace

AnomalyReport detect(const GbocModel& model, const TimeSeries& series, const TimeSeries* threshold_series) {
  AnomalyReport report;
  report.point_scores = point_scores_of(model, series, &report.window_scores);
  if (threshold_series) {
    const auto val = point_scores_of(model, *threshold_series, nullptr);
    report.threshold = threshold_3sigma(val).threshold;
    report.flags = apply_threshold(report.point_scores, report.threshold);
  } else {
    auto th = threshold_3sigma(report.point_scores);
    report.threshold = th.threshold;
    report.flags = std::move(th.flags);
  }
  return report;
}

void write_report_csv(const AnomalyReport& report, const std::optional<std::vector<std::uint8_t>>& labels,
                      const std::filesystem::path& path, bool scores_only) {
  if (labels && labels->size() != report.point_scores.size()) {
    throw Error(ErrorCode::ShapeMismatch, "labels and scores differ in length");
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  if (scores_only) {
    out << "t,point_score\n";
    for (std::size_t t = 0; t < report.point_scores.size(); ++t) {
      out << t << ',' << format_real(report.point_scores[t]) << '\n';
    }
  } else {
    out << "t,point_score,flag" << (labels ? ",label" : "") << '\n';
    for (std::size_t t = 0; t < report.point_scores.size(); ++t) {
      out << t << ',' << format_real(report.point_scores[t]) << ',' << static_cast<int>(report.flags[t]);
      if (labels) out << ',' << static_cast<int>((*labels)[t]);
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

ReportTable read_report_csv(const std::filesystem::path& path) {
  const TimeSeries raw = load_csv(path);
  const auto& names = raw.channel_names;
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (names[c] == name) return c;
    }
    return std::nullopt;
  };
  const auto score_col = column("point_score");
  if (!score_col) throw ParseError(0, 0, "report has no point_score column");

  auto binary = [&](std::size_t c) {
    std::vector<std::uint8_t> v(raw.length());
    for (std::size_t t = 0; t < raw.length(); ++t) {
      const double x = raw.values(t, c);
      if (x != 0.0 && x != 1.0) throw Error(ErrorCode::NonBinaryLabel, "row " + std::to_string(t + 1));
      v[t] = x == 1.0;
    }
    return v;
  };
  ReportTable table;
  table.scores.resize(raw.length());
  for (std::size_t t = 0; t < raw.length(); ++t) table.scores[t] = raw.values(t, *score_col);
  if (const auto c = column("flag")) table.flags = binary(*c);
  if (const auto c = column("label")) table.labels = binary(*c);
  return table;
}

}  // namespace gboc
