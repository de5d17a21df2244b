#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "gboc/granular.hpp"
#include "gboc/model.hpp"
#include "gboc/neural.hpp"
#include "gboc/tsdata.hpp"

namespace gboc {

struct EpochReport {
  std::size_t epoch = 0;
  double reconstruction = 0.0;  // sample-weighted mean over the epoch
  double alignment = 0.0;
  double total = 0.0;
  std::size_t balls_before_pruning = 0;
  std::size_t balls_after_pruning = 0;
  std::vector<LossBreakdown> batches;
};

struct TrainResult {
  GbocModel model;
  std::vector<EpochReport> reports;
};

// Mean squared distance of each latent to its nearest center of `set`.
double compute_lgb(const Matrix& latents, const GbSet& set);
// Mean squared norm of the per-row residual.
double compute_lrec(const Matrix& windows, const Matrix& reconstructions);

// Latent vector of every window row.
Matrix encode_all(const EncoderParams& enc, const Matrix& windows);

// The description built from one set of latents: the balls as generated and
// the set that remains after pruning (identical when pruning is off).
struct BallDescription {
  GbSet raw;
  GbSet retained;
};

BallDescription describe_latents(const Matrix& latents, const TrainConfig& cfg, std::uint64_t seed);

using EpochCallback = std::function<void(const EpochReport&)>;

TrainResult train(const TimeSeries& train_series, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace gboc
