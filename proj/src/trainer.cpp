#include "gboc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gboc/error.hpp"
#include "gboc/kernels.hpp"
#include "gboc/parallel.hpp"
#include "gboc/random.hpp"

namespace gboc {

double compute_lgb(const Matrix& latents, const GbSet& set) {
  if (set.empty()) throw Error(ErrorCode::EmptySet, "alignment loss needs at least one ball");
  if (latents.rows == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < latents.rows; ++i) {
    const double d = nearest_center(set, latents.row(i)).distance;
    total += d * d;
  }
  return total / static_cast<double>(latents.rows);
}

double compute_lrec(const Matrix& windows, const Matrix& reconstructions) {
  if (windows.rows != reconstructions.rows || windows.cols != reconstructions.cols) {
    throw Error(ErrorCode::ShapeMismatch, "reconstruction shape differs from the windows");
  }
  if (windows.rows == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < windows.rows; ++i) {
    total += kernels::squared_distance(windows.row(i), reconstructions.row(i));
  }
  return total / static_cast<double>(windows.rows);
}

Matrix encode_all(const EncoderParams& enc, const Matrix& windows) {
  Matrix z(windows.rows, enc.latent_dim());
  parallel_for(windows.rows, [&](std::size_t i) {
    const auto v = encode(enc, windows.row(i));
    std::copy(v.begin(), v.end(), z.row(i).begin());
  });
  return z;
}

BallDescription describe_latents(const Matrix& latents, const TrainConfig& cfg, std::uint64_t seed) {
  BallDescription out;
  if (cfg.gbc_off) {
    auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(latents.rows)));
    while (k * k > latents.rows) --k;
    out.raw = kmeans_balls(latents, std::max<std::size_t>(k, 1), seed);
    out.raw.s_min = cfg.s_min;
  } else {
    GenerateOptions opts;
    opts.s_min = cfg.s_min;
    opts.seed = seed;
    opts.child_support = cfg.strict_child_support ? ChildSupport::MinSupport : ChildSupport::NonDegenerate;
    out.raw = generate(latents, opts);
  }
  out.raw.mu = cfg.mu;
  out.retained = cfg.prune_off ? out.raw : prune(out.raw, cfg.mu);
  return out;
}

TrainResult train(const TimeSeries& series, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (series.length() < cfg.window) {
    throw Error(ErrorCode::WindowTooLong, "training series shorter than the window");
  }

  TrainResult result;
  GbocModel& model = result.model;
  model.window_len = cfg.window;
  model.stride = cfg.stride;
  model.channels = series.channels();
  model.config = cfg;
  model.norm = fit_normalizer(series);
  const WindowSet ws = make_windows(apply_normalizer(series, model.norm), cfg.window, cfg.stride);
  const std::size_t n = ws.size();

  auto init_rng = make_rng(cfg.seed, 10);
  NetworkShape shape;
  shape.input_size = series.channels();
  shape.window_len = cfg.window;
  shape.layers = cfg.layers;
  shape.hidden = cfg.hidden;
  shape.decoder_width = cfg.decoder_width;
  model.net = make_network(shape, init_rng);

  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  Adam adam(model.net, adam_cfg);
  Network grads = zeros_like(model.net);
  auto order_rng = make_rng(cfg.seed, 20);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  Matrix assign_centers;
  BallDescription balls;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochReport report;
    report.epoch = epoch;
    if (epoch % cfg.rebuild_every == 0) {
      balls = describe_latents(encode_all(model.net.encoder, ws.windows), cfg, cfg.seed + epoch);
      assign_centers = centers_of(cfg.assign_unpruned ? balls.raw : balls.retained);
    }
    report.balls_before_pruning = balls.raw.size();
    report.balls_after_pruning = balls.retained.size();

    shuffle(order.begin(), order.end(), order_rng);
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, n - begin);
      Matrix batch(count, ws.windows.cols);
      for (std::size_t i = 0; i < count; ++i) {
        const auto src = ws.windows.row(order[begin + i]);
        std::copy(src.begin(), src.end(), batch.row(i).begin());
      }
      const BatchInput input{batch, batch, assign_centers, {}, cfg.lambda};
      const LossBreakdown loss = backward(model.net, input, grads);
      if (!std::isfinite(loss.total)) {
        throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch) + ", batch starting at " +
                                                  std::to_string(begin) + ": loss is not finite");
      }
      adam.step(model.net, grads);
      report.reconstruction += loss.reconstruction * static_cast<double>(count);
      report.alignment += loss.alignment * static_cast<double>(count);
      report.batches.push_back(loss);
    }
    report.reconstruction /= static_cast<double>(n);
    report.alignment /= static_cast<double>(n);
    report.total = cfg.lambda * report.reconstruction + (1.0 - cfg.lambda) * report.alignment;
    if (on_epoch) on_epoch(report);
    result.reports.push_back(std::move(report));
  }

  const Matrix latents = encode_all(model.net.encoder, ws.windows);
  balls = describe_latents(latents, cfg, cfg.seed + cfg.epochs);
  model.centers = centers_of(balls.retained);
  for (const auto& b : balls.retained.balls) {
    model.radii.push_back(b.radius);
    model.member_counts.push_back(static_cast<std::uint32_t>(b.size()));
  }
  model.validate();
  return result;
}

}  // namespace gboc
