#include "gboc/tsdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gboc/csv_format.hpp"
#include "gboc/error.hpp"
#include "gboc/random.hpp"

namespace gboc {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  while (true) {
    const auto pos = line.find(',', begin);
    out.push_back(trim(line.substr(begin, pos == std::string_view::npos ? std::string_view::npos : pos - begin)));
    if (pos == std::string_view::npos) break;
    begin = pos + 1;
  }
  return out;
}

std::optional<double> parse_real(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

TimeSeries load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError(0, 0, "missing header row");
  const auto header = split_commas(line);

  std::optional<std::size_t> label_idx;
  TimeSeries ts;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (label_column && header[c] == *label_column) {
      label_idx = c;
    } else {
      ts.channel_names.emplace_back(header[c]);
    }
  }
  if (label_column && !label_idx) throw ParseError(0, 0, "label column '" + *label_column + "' not in header");
  if (ts.channel_names.empty()) throw ParseError(0, 0, "no feature columns");

  const std::size_t d = ts.channel_names.size();
  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw ParseError(row, std::min(fields.size(), header.size()), "expected " + std::to_string(header.size()) + " fields");
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto v = parse_real(fields[c]);
      if (label_idx && c == *label_idx) {
        if (!v || (*v != 0.0 && *v != 1.0)) {
          throw Error(ErrorCode::NonBinaryLabel, "row " + std::to_string(row) + ": '" + std::string(fields[c]) + "'");
        }
        labels.push_back(*v == 1.0 ? 1 : 0);
      } else {
        if (!v) throw ParseError(row, c, "not a finite real: '" + std::string(fields[c]) + "'");
        values.push_back(*v);
      }
    }
  }
  if (row == 0) throw ParseError(0, 0, "no data rows");

  ts.values.rows = row;
  ts.values.cols = d;
  ts.values.values = std::move(values);
  if (label_idx) ts.labels = std::move(labels);
  return ts;
}

void save_csv(const TimeSeries& ts, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (std::size_t c = 0; c < ts.channels(); ++c) {
    if (c) out << ',';
    out << (c < ts.channel_names.size() ? ts.channel_names[c] : "v" + std::to_string(c));
  }
  if (ts.labels) out << ",label";
  out << '\n';
  for (std::size_t t = 0; t < ts.length(); ++t) {
    for (std::size_t c = 0; c < ts.channels(); ++c) {
      if (c) out << ',';
      out << format_real(ts.values(t, c));
    }
    if (ts.labels) out << ',' << static_cast<int>((*ts.labels)[t]);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

NormStats fit_normalizer(const TimeSeries& train) {
  const std::size_t n = train.length();
  const std::size_t d = train.channels();
  if (n < 2) throw Error(ErrorCode::DegenerateSeries, "need at least 2 timesteps, got " + std::to_string(n));

  NormStats stats{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t c = 0; c < d; ++c) {
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) sum += train.values(t, c);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double dev = train.values(t, c) - mean;
      ss += dev * dev;
    }
    stats.mean[c] = mean;
    stats.std[c] = std::max(std::sqrt(ss / static_cast<double>(n - 1)), kStdFloor);
  }
  return stats;
}

TimeSeries apply_normalizer(const TimeSeries& ts, const NormStats& stats) {
  if (stats.mean.size() != ts.channels() || stats.std.size() != ts.channels()) {
    throw Error(ErrorCode::ShapeMismatch, "normalizer has " + std::to_string(stats.mean.size()) +
                                              " channels, series has " + std::to_string(ts.channels()));
  }
  TimeSeries out = ts;
  for (std::size_t t = 0; t < ts.length(); ++t) {
    for (std::size_t c = 0; c < ts.channels(); ++c) {
      out.values(t, c) = (ts.values(t, c) - stats.mean[c]) / stats.std[c];
    }
  }
  return out;
}

WindowSet make_windows(const TimeSeries& ts, std::size_t window_len, std::size_t stride) {
  if (window_len == 0 || stride == 0) throw Error(ErrorCode::BadParams, "window length and stride must be positive");
  const std::size_t n = ts.length();
  if (window_len > n) {
    throw Error(ErrorCode::WindowTooLong,
                "window " + std::to_string(window_len) + " exceeds series length " + std::to_string(n));
  }
  const std::size_t d = ts.channels();
  const std::size_t count = (n - window_len) / stride + 1;

  WindowSet ws;
  ws.window_len = window_len;
  ws.stride = stride;
  ws.channels = d;
  ws.windows = Matrix(count, window_len * d);
  ws.starts.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t start = i * stride;
    ws.starts[i] = start;
    const auto src = ts.values.values.begin() + static_cast<std::ptrdiff_t>(start * d);
    std::copy(src, src + static_cast<std::ptrdiff_t>(window_len * d), ws.windows.row(i).begin());
  }
  return ws;
}

std::vector<std::uint8_t> window_labels(const TimeSeries& ts, const WindowSet& ws) {
  std::vector<std::uint8_t> out(ws.size(), 0);
  if (!ts.labels) return out;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const auto first = ts.labels->begin() + static_cast<std::ptrdiff_t>(ws.starts[i]);
    out[i] = std::any_of(first, first + static_cast<std::ptrdiff_t>(ws.window_len), [](auto v) { return v != 0; });
  }
  return out;
}

std::optional<ScenarioKind> parse_scenario_kind(const std::string& s) {
  if (s == "clean") return ScenarioKind::Clean;
  if (s == "drift") return ScenarioKind::Drift;
  if (s == "noise") return ScenarioKind::Noise;
  if (s == "drift_noise" || s == "drift+noise") return ScenarioKind::DriftNoise;
  return std::nullopt;
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Clean: return "clean";
    case ScenarioKind::Drift: return "drift";
    case ScenarioKind::Noise: return "noise";
    case ScenarioKind::DriftNoise: return "drift_noise";
  }
  return "clean";
}

Scenario synth_scenario(ScenarioKind kind, std::size_t length, std::uint64_t seed, const SynthParams& p) {
  if (length < 200) throw Error(ErrorCode::BadParams, "scenario length must be >= 200");
  if (p.channels == 0) throw Error(ErrorCode::BadParams, "channels must be positive");
  if (p.point_anomalies > 0 && !(p.spike_magnitude > 0.0)) {
    throw Error(ErrorCode::BadParams, "spike magnitude must be positive");
  }
  if (p.range_anomalies > 0 && (!(p.shift_magnitude > 0.0) || p.range_length == 0)) {
    throw Error(ErrorCode::BadParams, "level shift magnitude and length must be positive");
  }
  if (!(p.noise_sigma >= 0.0) || !std::isfinite(p.drift_slope)) {
    throw Error(ErrorCode::BadParams, "noise sigma must be nonnegative and drift finite");
  }

  const std::size_t d = p.channels;
  auto shape_rng = make_rng(seed, 1);
  const double period_slow = uniform(shape_rng, 30.0, 60.0);
  const double period_fast = uniform(shape_rng, 8.0, 16.0);
  std::vector<double> phase_slow(d), phase_fast(d), amp_fast(d);
  for (std::size_t c = 0; c < d; ++c) {
    phase_slow[c] = uniform(shape_rng, 0.0, 2.0 * std::numbers::pi);
    phase_fast[c] = uniform(shape_rng, 0.0, 2.0 * std::numbers::pi);
    amp_fast[c] = uniform(shape_rng, 0.3, 0.6);
  }
  auto signal = [&](std::size_t t, std::size_t c) {
    const double x = static_cast<double>(t);
    return std::sin(2.0 * std::numbers::pi * x / period_slow + phase_slow[c]) +
           amp_fast[c] * std::sin(2.0 * std::numbers::pi * x / period_fast + phase_fast[c]);
  };

  std::vector<std::string> names;
  for (std::size_t c = 0; c < d; ++c) names.push_back("v" + std::to_string(c));

  Scenario sc;
  sc.train.values = Matrix(length, d);
  sc.train.channel_names = names;
  sc.test.values = Matrix(length, d);
  sc.test.channel_names = names;
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t c = 0; c < d; ++c) {
      sc.train.values(t, c) = signal(t, c);
      sc.test.values(t, c) = signal(length + t, c);
    }
  }

  // Anomalies: one event per equal-width slot, placed at a random offset.
  std::vector<std::uint8_t> labels(length, 0);
  const std::size_t events = p.point_anomalies + p.range_anomalies;
  if (events > 0) {
    const std::size_t margin = 20;
    const std::size_t span = p.range_anomalies > 0 ? p.range_length : 1;
    const std::size_t slot = (length - 2 * margin) / events;
    if (slot < span + 8) throw Error(ErrorCode::BadParams, "too many anomalies for the series length");
    auto anomaly_rng = make_rng(seed, 2);
    std::vector<bool> is_range(events, false);
    std::fill(is_range.begin(), is_range.begin() + static_cast<std::ptrdiff_t>(p.range_anomalies), true);
    shuffle(is_range.begin(), is_range.end(), anomaly_rng);
    for (std::size_t e = 0; e < events; ++e) {
      const std::size_t len = is_range[e] ? p.range_length : 1;
      const std::size_t slack = slot - len - 8;
      const std::size_t begin = margin + e * slot + 4 + uniform_index(anomaly_rng, slack + 1);
      const double sign = uniform01(anomaly_rng) < 0.5 ? -1.0 : 1.0;
      const double magnitude = sign * (is_range[e] ? p.shift_magnitude : p.spike_magnitude);
      for (std::size_t t = begin; t < begin + len; ++t) {
        labels[t] = 1;
        for (std::size_t c = 0; c < d; ++c) sc.test.values(t, c) += magnitude;
      }
    }
  }
  sc.test.labels = std::move(labels);

  if (kind == ScenarioKind::Drift || kind == ScenarioKind::DriftNoise) {
    for (std::size_t t = 0; t < length; ++t) {
      for (std::size_t c = 0; c < d; ++c) sc.test.values(t, c) += p.drift_slope * static_cast<double>(t);
    }
  }
  if ((kind == ScenarioKind::Noise || kind == ScenarioKind::DriftNoise) && p.noise_sigma > 0.0) {
    auto noise_rng = make_rng(seed, 3);
    for (double& v : sc.test.values.values) v += p.noise_sigma * standard_normal(noise_rng);
  }
  return sc;
}

}  // namespace gboc
