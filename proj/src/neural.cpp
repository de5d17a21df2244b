#include "gboc/neural.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gboc/error.hpp"
#include "gboc/kernels.hpp"
#include "gboc/kmeans.hpp"
#include "gboc/parallel.hpp"

namespace gboc {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void fill_uniform(std::vector<double>& v, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& x : v) x = uniform(rng, -bound, bound);
}

std::size_t timesteps_of(const EncoderParams& enc, std::span<const double> window) {
  const std::size_t d = enc.input_size();
  if (enc.layers.empty() || d == 0 || window.empty() || window.size() % d != 0) {
    throw Error(ErrorCode::ShapeMismatch, "window of " + std::to_string(window.size()) +
                                              " values does not match encoder input size " + std::to_string(d));
  }
  return window.size() / d;
}

// Forward activations of one layer over all timesteps.
struct LayerTrace {
  std::vector<double> gates;   // w x 4h, post-nonlinearity
  std::vector<double> cell;    // w x h
  std::vector<double> tanh_c;  // w x h
  std::vector<double> hidden;  // w x h
};

struct SampleTrace {
  std::vector<LayerTrace> layers;
  std::vector<double> z;
  std::vector<double> dec_hidden;  // tanh activations
  std::vector<double> output;
};

void run_layer(const LstmLayer& layer, std::span<const double> inputs, std::size_t steps, LayerTrace& tr) {
  const std::size_t h = layer.hidden;
  const std::size_t g4 = 4 * h;
  tr.gates.assign(steps * g4, 0.0);
  tr.cell.assign(steps * h, 0.0);
  tr.tanh_c.assign(steps * h, 0.0);
  tr.hidden.assign(steps * h, 0.0);
  const auto& k = kernels::active();
  for (std::size_t t = 0; t < steps; ++t) {
    double* a = tr.gates.data() + t * g4;
    std::copy(layer.bias.begin(), layer.bias.end(), a);
    k.vecmat(layer.w_input.data(), layer.input, g4, inputs.data() + t * layer.input, a);
    if (t > 0) k.vecmat(layer.w_hidden.data(), h, g4, tr.hidden.data() + (t - 1) * h, a);
    const double* c_prev = t > 0 ? tr.cell.data() + (t - 1) * h : nullptr;
    double* c = tr.cell.data() + t * h;
    double* tc = tr.tanh_c.data() + t * h;
    double* hs = tr.hidden.data() + t * h;
    for (std::size_t j = 0; j < h; ++j) {
      const double i_g = sigmoid(a[j]);
      const double f_g = sigmoid(a[h + j]);
      const double c_g = std::tanh(a[2 * h + j]);
      const double o_g = sigmoid(a[3 * h + j]);
      a[j] = i_g;
      a[h + j] = f_g;
      a[2 * h + j] = c_g;
      a[3 * h + j] = o_g;
      c[j] = (c_prev ? f_g * c_prev[j] : 0.0) + i_g * c_g;
      tc[j] = std::tanh(c[j]);
      hs[j] = o_g * tc[j];
    }
  }
}

void forward_encoder(const EncoderParams& enc, std::span<const double> window, SampleTrace& tr) {
  const std::size_t steps = timesteps_of(enc, window);
  const std::size_t h = enc.hidden_size();
  tr.layers.resize(enc.layers.size());
  tr.z.assign(enc.latent_dim(), 0.0);
  for (std::size_t l = 0; l < enc.layers.size(); ++l) {
    std::span<const double> in = l == 0 ? window : std::span<const double>(tr.layers[l - 1].hidden);
    run_layer(enc.layers[l], in, steps, tr.layers[l]);
    std::copy_n(tr.layers[l].hidden.begin() + static_cast<std::ptrdiff_t>((steps - 1) * h), h,
                tr.z.begin() + static_cast<std::ptrdiff_t>(l * h));
  }
}

void forward_decoder(const DecoderParams& dec, std::span<const double> z, SampleTrace& tr) {
  if (z.size() != dec.latent) {
    throw Error(ErrorCode::ShapeMismatch,
                "latent of size " + std::to_string(z.size()) + ", decoder expects " + std::to_string(dec.latent));
  }
  const auto& k = kernels::active();
  tr.dec_hidden = dec.b_hidden;
  k.vecmat(dec.w_hidden.data(), dec.latent, dec.width, z.data(), tr.dec_hidden.data());
  for (double& v : tr.dec_hidden) v = std::tanh(v);
  tr.output = dec.b_out;
  k.vecmat(dec.w_out.data(), dec.width, dec.output, tr.dec_hidden.data(), tr.output.data());
}

void check_batch(const Network& net, const BatchInput& b) {
  const std::size_t n = b.windows.rows;
  if (b.targets.rows != n || (!b.assignment.empty() && b.assignment.size() != n)) {
    throw Error(ErrorCode::ShapeMismatch, "batch windows, targets and assignment disagree in length");
  }
  if (b.targets.cols != net.decoder.output) {
    throw Error(ErrorCode::ShapeMismatch, "target width " + std::to_string(b.targets.cols) +
                                              " != decoder output " + std::to_string(net.decoder.output));
  }
  if (!(b.lambda >= 0.0 && b.lambda <= 1.0)) throw Error(ErrorCode::BadParams, "lambda must lie in [0, 1]");
  if (b.lambda < 1.0 && b.centers.rows == 0) throw Error(ErrorCode::EmptySet, "alignment term needs centers");
  if (b.centers.rows > 0) {
    if (b.centers.cols != net.encoder.latent_dim()) {
      throw Error(ErrorCode::ShapeMismatch, "center dimension does not match latent dimension");
    }
    for (std::size_t a : b.assignment) {
      if (a >= b.centers.rows) throw Error(ErrorCode::ShapeMismatch, "assignment index out of range");
    }
  }
}

struct SampleLoss {
  double rec = 0.0;
  double gb = 0.0;
  std::size_t center = 0;
};

SampleLoss sample_loss(const BatchInput& b, std::size_t i, const SampleTrace& tr) {
  SampleLoss out;
  out.rec = kernels::squared_distance(b.targets.row(i), tr.output);
  if (b.centers.rows > 0) {
    if (b.assignment.empty()) {
      const auto [j, d2] = closest_row(b.centers, tr.z);
      out.center = j;
      out.gb = d2;
    } else {
      out.center = b.assignment[i];
      out.gb = kernels::squared_distance(tr.z, b.centers.row(out.center));
    }
  }
  return out;
}

// Accumulates one sample's gradient into grads.
void backward_sample(const Network& net, const BatchInput& b, std::size_t i, std::size_t center,
                     const SampleTrace& tr, Network& grads) {
  const auto& k = kernels::active();
  const EncoderParams& enc = net.encoder;
  const DecoderParams& dec = net.decoder;
  const double inv_n = 1.0 / static_cast<double>(b.windows.rows);
  std::vector<double> dz(enc.latent_dim(), 0.0);

  if (b.lambda > 0.0) {
    const double scale = 2.0 * b.lambda * inv_n;
    std::vector<double> dout(dec.output);
    const auto target = b.targets.row(i);
    for (std::size_t j = 0; j < dec.output; ++j) dout[j] = scale * (tr.output[j] - target[j]);

    DecoderParams& gd = grads.decoder;
    k.axpy(1.0, dout.data(), gd.b_out.data(), dec.output);
    std::vector<double> dpre(dec.width);
    for (std::size_t j = 0; j < dec.width; ++j) {
      k.axpy(tr.dec_hidden[j], dout.data(), gd.w_out.data() + j * dec.output, dec.output);
      const double dh = k.dot(dec.w_out.data() + j * dec.output, dout.data(), dec.output);
      dpre[j] = dh * (1.0 - tr.dec_hidden[j] * tr.dec_hidden[j]);
    }
    k.axpy(1.0, dpre.data(), gd.b_hidden.data(), dec.width);
    for (std::size_t j = 0; j < dec.latent; ++j) {
      k.axpy(tr.z[j], dpre.data(), gd.w_hidden.data() + j * dec.width, dec.width);
      dz[j] += k.dot(dec.w_hidden.data() + j * dec.width, dpre.data(), dec.width);
    }
  }
  if (b.lambda < 1.0) {
    const double scale = 2.0 * (1.0 - b.lambda) * inv_n;
    const auto c = b.centers.row(center);
    for (std::size_t j = 0; j < dz.size(); ++j) dz[j] += scale * (tr.z[j] - c[j]);
  }

  // Backpropagation through time, top layer first. dh_ext carries the
  // gradient arriving at each timestep's hidden output from the layer above.
  const std::size_t h = enc.hidden_size();
  const std::size_t g4 = 4 * h;
  const std::size_t steps = tr.layers.front().hidden.size() / h;
  std::vector<double> dh_ext(steps * h, 0.0);
  std::vector<double> dx_below;
  std::vector<double> dh_next(h), dc_next(h), da(g4);
  const auto window = b.windows.row(i);

  for (std::size_t l = enc.layers.size(); l-- > 0;) {
    const LstmLayer& layer = enc.layers[l];
    LstmLayer& gl = grads.encoder.layers[l];
    const LayerTrace& lt = tr.layers[l];
    const double* inputs = l == 0 ? window.data() : tr.layers[l - 1].hidden.data();
    for (std::size_t j = 0; j < h; ++j) dh_ext[(steps - 1) * h + j] += dz[l * h + j];
    if (l > 0) dx_below.assign(steps * h, 0.0);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    std::fill(dc_next.begin(), dc_next.end(), 0.0);

    for (std::size_t t = steps; t-- > 0;) {
      const double* gate = lt.gates.data() + t * g4;
      const double* tc = lt.tanh_c.data() + t * h;
      const double* c_prev = t > 0 ? lt.cell.data() + (t - 1) * h : nullptr;
      for (std::size_t j = 0; j < h; ++j) {
        const double ig = gate[j], fg = gate[h + j], cg = gate[2 * h + j], og = gate[3 * h + j];
        const double dh = dh_ext[t * h + j] + dh_next[j];
        const double dc = dc_next[j] + dh * og * (1.0 - tc[j] * tc[j]);
        da[j] = dc * cg * ig * (1.0 - ig);
        da[h + j] = c_prev ? dc * c_prev[j] * fg * (1.0 - fg) : 0.0;
        da[2 * h + j] = dc * ig * (1.0 - cg * cg);
        da[3 * h + j] = dh * tc[j] * og * (1.0 - og);
        dc_next[j] = dc * fg;
      }
      k.axpy(1.0, da.data(), gl.bias.data(), g4);
      const double* x = inputs + t * layer.input;
      for (std::size_t r = 0; r < layer.input; ++r) {
        k.axpy(x[r], da.data(), gl.w_input.data() + r * g4, g4);
        if (l > 0) dx_below[t * h + r] = k.dot(layer.w_input.data() + r * g4, da.data(), g4);
      }
      if (t > 0) {
        const double* h_prev = lt.hidden.data() + (t - 1) * h;
        for (std::size_t r = 0; r < h; ++r) {
          k.axpy(h_prev[r], da.data(), gl.w_hidden.data() + r * g4, g4);
          dh_next[r] = k.dot(layer.w_hidden.data() + r * g4, da.data(), g4);
        }
      }
    }
    if (l > 0) dh_ext.swap(dx_below);
  }
}

LossBreakdown summarize(const BatchInput& b, const std::vector<SampleLoss>& per) {
  LossBreakdown out;
  for (const auto& s : per) {
    out.reconstruction += s.rec;
    out.alignment += s.gb;
  }
  if (!per.empty()) {
    out.reconstruction /= static_cast<double>(per.size());
    out.alignment /= static_cast<double>(per.size());
  }
  out.total = b.lambda * out.reconstruction + (1.0 - b.lambda) * out.alignment;
  if (b.assigned) {
    b.assigned->resize(per.size());
    for (std::size_t i = 0; i < per.size(); ++i) (*b.assigned)[i] = per[i].center;
  }
  return out;
}

void zero(Network& net) {
  for (auto t : tensors(net)) std::fill(t.begin(), t.end(), 0.0);
}

void add_into(Network& dst, const Network& src) {
  auto d = tensors(dst);
  const auto s = tensors(src);
  for (std::size_t i = 0; i < d.size(); ++i) kernels::axpy(1.0, s[i], d[i]);
}

}  // namespace

Network make_network(const NetworkShape& s, Rng& rng) {
  if (s.input_size == 0 || s.window_len == 0 || s.hidden == 0 || s.decoder_width == 0 || s.layers < 1 ||
      s.layers > 3) {
    throw Error(ErrorCode::BadParams, "network needs positive sizes and 1..3 layers");
  }
  Network net;
  for (std::size_t l = 0; l < s.layers; ++l) {
    LstmLayer layer;
    layer.input = l == 0 ? s.input_size : s.hidden;
    layer.hidden = s.hidden;
    layer.w_input.resize(layer.input * 4 * s.hidden);
    layer.w_hidden.resize(s.hidden * 4 * s.hidden);
    layer.bias.assign(4 * s.hidden, 0.0);
    fill_uniform(layer.w_input, layer.input, rng);
    fill_uniform(layer.w_hidden, s.hidden, rng);
    std::fill_n(layer.bias.begin() + static_cast<std::ptrdiff_t>(s.hidden), s.hidden, 1.0);
    net.encoder.layers.push_back(std::move(layer));
  }
  DecoderParams& dec = net.decoder;
  dec.latent = s.layers * s.hidden;
  dec.width = s.decoder_width;
  dec.output = s.window_len * s.input_size;
  dec.w_hidden.resize(dec.latent * dec.width);
  dec.b_hidden.assign(dec.width, 0.0);
  dec.w_out.resize(dec.width * dec.output);
  dec.b_out.assign(dec.output, 0.0);
  fill_uniform(dec.w_hidden, dec.latent, rng);
  fill_uniform(dec.w_out, dec.width, rng);
  return net;
}

Network zeros_like(const Network& net) {
  Network z = net;
  zero(z);
  return z;
}

std::vector<std::span<double>> tensors(Network& net) {
  std::vector<std::span<double>> out;
  for (auto& l : net.encoder.layers) {
    out.emplace_back(l.w_input);
    out.emplace_back(l.w_hidden);
    out.emplace_back(l.bias);
  }
  auto& d = net.decoder;
  out.emplace_back(d.w_hidden);
  out.emplace_back(d.b_hidden);
  out.emplace_back(d.w_out);
  out.emplace_back(d.b_out);
  return out;
}

std::vector<std::span<const double>> tensors(const Network& net) {
  auto mut = tensors(const_cast<Network&>(net));
  return {mut.begin(), mut.end()};
}

std::size_t parameter_count(const Network& net) {
  std::size_t n = 0;
  for (auto t : tensors(net)) n += t.size();
  return n;
}

std::vector<double> encode(const EncoderParams& enc, std::span<const double> window) {
  SampleTrace tr;
  forward_encoder(enc, window, tr);
  return std::move(tr.z);
}

std::vector<double> decode(const DecoderParams& dec, std::span<const double> z) {
  SampleTrace tr;
  forward_decoder(dec, z, tr);
  return std::move(tr.output);
}

LossBreakdown evaluate_loss(const Network& net, const BatchInput& b) {
  check_batch(net, b);
  const std::size_t n = b.windows.rows;
  std::vector<SampleLoss> per(n);
  parallel_for(n, [&](std::size_t i) {
    SampleTrace tr;
    forward_encoder(net.encoder, b.windows.row(i), tr);
    forward_decoder(net.decoder, tr.z, tr);
    per[i] = sample_loss(b, i, tr);
  });
  return summarize(b, per);
}

LossBreakdown backward(const Network& net, const BatchInput& b, Network& grads) {
  check_batch(net, b);
  const std::size_t n = b.windows.rows;
  if (grads.encoder.layers.size() != net.encoder.layers.size() ||
      parameter_count(grads) != parameter_count(net)) {
    grads = zeros_like(net);
  } else {
    zero(grads);
  }

  // Per-sample gradients are reduced in row order whatever the worker count.
  std::vector<SampleLoss> per(n);
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    Network scratch = zeros_like(net);
    SampleTrace tr;
    for (std::size_t i = 0; i < n; ++i) {
      forward_encoder(net.encoder, b.windows.row(i), tr);
      forward_decoder(net.decoder, tr.z, tr);
      per[i] = sample_loss(b, i, tr);
      zero(scratch);
      backward_sample(net, b, i, per[i].center, tr, scratch);
      add_into(grads, scratch);
    }
  } else {
    std::vector<Network> partial(n, zeros_like(net));
    parallel_for(n, [&](std::size_t i) {
      SampleTrace tr;
      forward_encoder(net.encoder, b.windows.row(i), tr);
      forward_decoder(net.decoder, tr.z, tr);
      per[i] = sample_loss(b, i, tr);
      backward_sample(net, b, i, per[i].center, tr, partial[i]);
    });
    for (const auto& p : partial) add_into(grads, p);
  }

  for (auto t : tensors(grads)) {
    if (!std::all_of(t.begin(), t.end(), [](double v) { return std::isfinite(v); })) {
      throw Error(ErrorCode::NonFiniteGradient, "gradient diverged");
    }
  }

  return summarize(b, per);
}

Adam::Adam(const Network& like, AdamConfig cfg)
    : cfg_(cfg), first_(zeros_like(like)), second_(zeros_like(like)) {}

void Adam::step(Network& params, const Network& grads) {
  auto p = tensors(params);
  const auto g = tensors(grads);
  auto m = tensors(first_);
  auto v = tensors(second_);
  if (p.size() != g.size() || p.size() != m.size()) throw Error(ErrorCode::ShapeMismatch, "optimizer shape mismatch");
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k].size() != g[k].size() || p[k].size() != m[k].size()) {
      throw Error(ErrorCode::ShapeMismatch, "optimizer shape mismatch");
    }
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      const double gi = g[k][i];
      m[k][i] = cfg_.beta1 * m[k][i] + (1.0 - cfg_.beta1) * gi;
      v[k][i] = cfg_.beta2 * v[k][i] + (1.0 - cfg_.beta2) * gi * gi;
      const double m_hat = m[k][i] / c1;
      const double v_hat = v[k][i] / c2;
      p[k][i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

}  // namespace gboc
