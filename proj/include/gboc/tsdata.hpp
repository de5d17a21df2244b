#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gboc/matrix.hpp"

namespace gboc {

// T x d observations; labels, when present, hold one 0/1 flag per timestep.
struct TimeSeries {
  Matrix values;
  std::optional<std::vector<std::uint8_t>> labels;
  std::vector<std::string> channel_names;

  std::size_t length() const noexcept { return values.rows; }
  std::size_t channels() const noexcept { return values.cols; }

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;
};

// Overlapping windows, each row flattened timestep-major then channel.
struct WindowSet {
  Matrix windows;
  std::vector<std::size_t> starts;
  std::size_t window_len = 0;
  std::size_t stride = 1;
  std::size_t channels = 0;

  std::size_t size() const noexcept { return windows.rows; }
};

inline constexpr double kStdFloor = 1e-8;

struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

// Reads a headered, comma-separated file. Every column except `label_column`
// is a feature.
TimeSeries load_csv(const std::filesystem::path& path,
                    const std::optional<std::string>& label_column = std::nullopt);

// Writes values (and labels as a trailing "label" column when present) with
// 17 significant digits.
void save_csv(const TimeSeries& ts, const std::filesystem::path& path);

NormStats fit_normalizer(const TimeSeries& train);
TimeSeries apply_normalizer(const TimeSeries& ts, const NormStats& stats);

WindowSet make_windows(const TimeSeries& ts, std::size_t window_len, std::size_t stride = 1);

// Window label = 1 iff any covered timestep is labelled 1.
std::vector<std::uint8_t> window_labels(const TimeSeries& ts, const WindowSet& ws);

enum class ScenarioKind { Clean, Drift, Noise, DriftNoise };

std::optional<ScenarioKind> parse_scenario_kind(const std::string& s);
std::string to_string(ScenarioKind kind);

struct SynthParams {
  std::size_t channels = 1;
  std::size_t point_anomalies = 8;   // K spikes
  std::size_t range_anomalies = 4;   // level shifts
  std::size_t range_length = 12;     // l
  double spike_magnitude = 4.0;      // a_spike
  double shift_magnitude = 2.5;
  double drift_slope = 5e-4;         // delta, per timestep
  double noise_sigma = 0.3;          // sigma_n
};

struct Scenario {
  TimeSeries train;
  TimeSeries test;
};

// train: anomaly-free sinusoid mixture of length T. test: the continuation of
// the same signal with injected spikes and level shifts (labelled), then the
// drift and/or noise of the chosen kind. Components draw from independent
// seeded streams, so e.g. zero noise reproduces the clean output exactly.
Scenario synth_scenario(ScenarioKind kind, std::size_t length, std::uint64_t seed,
                        const SynthParams& params = {});

}  // namespace gboc
