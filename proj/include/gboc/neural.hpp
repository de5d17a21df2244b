#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gboc/matrix.hpp"
#include "gboc/random.hpp"

namespace gboc {

// One recurrent layer with the standard four gates. Weights are stored
// input-major: w_input is input x 4h and w_hidden is h x 4h, each row holding
// the gate blocks in the order [input, forget, candidate, output].
struct LstmLayer {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::vector<double> w_input;
  std::vector<double> w_hidden;
  std::vector<double> bias;

  friend bool operator==(const LstmLayer&, const LstmLayer&) = default;
};

struct EncoderParams {
  std::vector<LstmLayer> layers;

  std::size_t input_size() const { return layers.empty() ? 0 : layers.front().input; }
  std::size_t hidden_size() const { return layers.empty() ? 0 : layers.front().hidden; }
  // Concatenated final hidden states of all layers.
  std::size_t latent_dim() const { return layers.size() * hidden_size(); }

  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

// latent -> tanh(width) -> output, weights input-major like the encoder.
struct DecoderParams {
  std::size_t latent = 0;
  std::size_t width = 0;
  std::size_t output = 0;
  std::vector<double> w_hidden;  // latent x width
  std::vector<double> b_hidden;  // width
  std::vector<double> w_out;     // width x output
  std::vector<double> b_out;     // output

  friend bool operator==(const DecoderParams&, const DecoderParams&) = default;
};

struct Network {
  EncoderParams encoder;
  DecoderParams decoder;

  friend bool operator==(const Network&, const Network&) = default;
};

struct NetworkShape {
  std::size_t input_size = 1;     // d
  std::size_t window_len = 10;    // w
  std::size_t layers = 3;         // L
  std::size_t hidden = 32;        // h
  std::size_t decoder_width = 64;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases except the
// forget gate (+1).
Network make_network(const NetworkShape& shape, Rng& rng);
Network zeros_like(const Network& net);

// Every parameter tensor in a fixed order (encoder layers, then decoder).
std::vector<std::span<double>> tensors(Network& net);
std::vector<std::span<const double>> tensors(const Network& net);
std::size_t parameter_count(const Network& net);

// window holds w x d values flattened timestep-major.
std::vector<double> encode(const EncoderParams& enc, std::span<const double> window);
std::vector<double> decode(const DecoderParams& dec, std::span<const double> z);

struct LossBreakdown {
  double reconstruction = 0.0;  // mean ||x - g(z)||^2
  double alignment = 0.0;       // mean ||z - c_s(i)||^2
  double total = 0.0;           // lambda * reconstruction + (1 - lambda) * alignment
};

// Joint objective over a batch. Centers are constants of the objective. The
// alignment term is reported whenever centers are given and optimized when
// lambda < 1. An empty assignment means "nearest center of each row's latent
// from this forward pass"; the chosen indices are written to
// `assigned` when it is non-null.
struct BatchInput {
  const Matrix& windows;
  const Matrix& targets;
  const Matrix& centers;
  std::span<const std::size_t> assignment;
  double lambda = 0.5;
  std::vector<std::size_t>* assigned = nullptr;
};

LossBreakdown evaluate_loss(const Network& net, const BatchInput& batch);

// Overwrites grads (shaped like net) with dL/dparams and returns the loss
// measured on the same forward pass. Throws NonFiniteGradient on divergence.
LossBreakdown backward(const Network& net, const BatchInput& batch, Network& grads);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(const Network& like, AdamConfig cfg = {});

  void step(Network& params, const Network& grads);
  std::size_t steps() const noexcept { return step_; }
  const AdamConfig& config() const noexcept { return cfg_; }

 private:
  AdamConfig cfg_;
  std::size_t step_ = 0;
  Network first_;
  Network second_;
};

}  // namespace gboc
