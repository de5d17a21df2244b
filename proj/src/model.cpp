#include "gboc/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "gboc/error.hpp"

namespace gboc {

void TrainConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::BadParams, m); };
  if (!(lambda >= 0.0 && lambda <= 1.0)) bad("lambda must lie in [0, 1]");
  if (epochs < 1) bad("epochs must be >= 1");
  if (batch_size < 1) bad("batch size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) bad("learning rate must be positive");
  if (window < 1 || stride < 1) bad("window and stride must be positive");
  if (layers < 1 || layers > 3) bad("layers must be 1, 2 or 3");
  if (hidden < 1 || decoder_width < 1) bad("hidden and decoder widths must be positive");
  if (!(mu > 0.0) || !std::isfinite(mu)) bad("mu must be positive");
  if (rebuild_every < 1) bad("rebuild_every must be >= 1");
}

void GbocModel::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvariantViolation, m); };
  if (version != kModelVersion) bad("unsupported version");
  if (window_len == 0 || stride == 0 || channels == 0) bad("zero window, stride or channel count");
  if (net.encoder.layers.empty() || net.encoder.layers.size() > 3) bad("encoder needs 1..3 layers");
  const std::size_t h = net.encoder.hidden_size();
  if (h == 0) bad("zero hidden size");
  for (std::size_t l = 0; l < net.encoder.layers.size(); ++l) {
    const auto& layer = net.encoder.layers[l];
    const std::size_t in = l == 0 ? channels : h;
    if (layer.input != in || layer.hidden != h || layer.w_input.size() != in * 4 * h ||
        layer.w_hidden.size() != h * 4 * h || layer.bias.size() != 4 * h) {
      bad("encoder layer " + std::to_string(l) + " has inconsistent shapes");
    }
  }
  const auto& dec = net.decoder;
  if (dec.latent != latent_dim() || dec.width == 0 || dec.output != window_len * channels ||
      dec.w_hidden.size() != dec.latent * dec.width || dec.b_hidden.size() != dec.width ||
      dec.w_out.size() != dec.width * dec.output || dec.b_out.size() != dec.output) {
    bad("decoder shapes inconsistent with encoder/window");
  }
  if (norm.mean.size() != channels || norm.std.size() != channels) bad("normalizer size mismatch");
  for (double s : norm.std) {
    if (!(s >= kStdFloor)) bad("normalizer std below floor");
  }
  if (centers.rows == 0) bad("model has no centers (M = 0)");
  if (centers.cols != latent_dim() || centers.values.size() != centers.rows * centers.cols) {
    bad("center dimension mismatch");
  }
  if (radii.size() != centers.rows || member_counts.size() != centers.rows) bad("radii/counts length mismatch");
  for (double r : radii) {
    if (!(r >= 0.0)) bad("negative radius");
  }
  for (auto t : tensors(net)) {
    for (double v : t) {
      if (!std::isfinite(v)) bad("non-finite parameter");
    }
  }
  for (double v : centers.values) {
    if (!std::isfinite(v)) bad("non-finite center");
  }
}

namespace {

constexpr char kMagic[4] = {'G', 'B', 'O', 'C'};

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void dim(std::size_t v) {
    if (v > std::numeric_limits<std::uint32_t>::max()) throw Error(ErrorCode::InvariantViolation, "dimension overflows u32");
    u32(static_cast<std::uint32_t>(v));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void reals(const std::vector<double>& v) {
    for (double x : v) f64(x);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> reals(std::size_t n) {
    need(n * 8);
    std::vector<double> v(n);
    for (double& x : v) x = f64();
    return v;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::TruncatedFile, "unexpected end of model data");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

// Guard allocations from a corrupted header before reading a count-sized block.
std::size_t checked_product(std::size_t a, std::size_t b) {
  if (a != 0 && b > (std::size_t{1} << 40) / a) throw Error(ErrorCode::InvariantViolation, "implausible tensor size");
  return a * b;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const GbocModel& m) {
  m.validate();
  Writer w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(m.version);
  const auto& enc = m.net.encoder;
  w.dim(m.window_len);
  w.dim(m.stride);
  w.dim(m.channels);
  w.dim(enc.layers.size());
  w.dim(enc.hidden_size());
  w.dim(m.latent_dim());
  w.dim(m.net.decoder.width);
  w.dim(m.centers.rows);

  w.reals(m.norm.mean);
  w.reals(m.norm.std);
  for (const auto& layer : enc.layers) {
    w.reals(layer.w_input);
    w.reals(layer.w_hidden);
    w.reals(layer.bias);
  }
  const auto& dec = m.net.decoder;
  w.reals(dec.w_hidden);
  w.reals(dec.b_hidden);
  w.reals(dec.w_out);
  w.reals(dec.b_out);
  w.reals(m.centers.values);
  w.reals(m.radii);
  for (auto c : m.member_counts) w.u32(c);

  const auto& c = m.config;
  w.dim(c.epochs);
  w.dim(c.batch_size);
  w.f64(c.lr);
  w.f64(c.lambda);
  w.dim(c.s_min);
  w.f64(c.mu);
  w.u64(c.seed);
  w.dim(c.rebuild_every);
  w.u8(static_cast<std::uint8_t>((c.gbc_off ? 1 : 0) | (c.prune_off ? 2 : 0) | (c.assign_unpruned ? 4 : 0) |
                                 (c.strict_child_support ? 8 : 0)));
  return w.take();
}

GbocModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (bytes.size() < 4) throw Error(ErrorCode::TruncatedFile, "file shorter than the magic header");
  for (char c : kMagic) {
    if (r.u8() != static_cast<std::uint8_t>(c)) throw Error(ErrorCode::BadMagic, "not a GBOC model file");
  }
  GbocModel m;
  m.version = r.u32();
  if (m.version != kModelVersion) {
    throw Error(ErrorCode::VersionUnsupported, "model version " + std::to_string(m.version));
  }
  m.window_len = r.u32();
  m.stride = r.u32();
  m.channels = r.u32();
  const std::size_t layers = r.u32();
  const std::size_t h = r.u32();
  const std::size_t latent = r.u32();
  const std::size_t width = r.u32();
  const std::size_t count = r.u32();
  if (layers < 1 || layers > 3 || latent != layers * h || h == 0 || m.channels == 0 || m.window_len == 0) {
    throw Error(ErrorCode::InvariantViolation, "inconsistent model dimensions");
  }
  if (count == 0) throw Error(ErrorCode::InvariantViolation, "model has no centers (M = 0)");

  m.norm.mean = r.reals(m.channels);
  m.norm.std = r.reals(m.channels);
  for (std::size_t l = 0; l < layers; ++l) {
    LstmLayer layer;
    layer.input = l == 0 ? m.channels : h;
    layer.hidden = h;
    layer.w_input = r.reals(checked_product(layer.input, 4 * h));
    layer.w_hidden = r.reals(checked_product(h, 4 * h));
    layer.bias = r.reals(4 * h);
    m.net.encoder.layers.push_back(std::move(layer));
  }
  auto& dec = m.net.decoder;
  dec.latent = latent;
  dec.width = width;
  dec.output = checked_product(m.window_len, m.channels);
  dec.w_hidden = r.reals(checked_product(latent, width));
  dec.b_hidden = r.reals(width);
  dec.w_out = r.reals(checked_product(width, dec.output));
  dec.b_out = r.reals(dec.output);
  m.centers.rows = count;
  m.centers.cols = latent;
  m.centers.values = r.reals(checked_product(count, latent));
  m.radii = r.reals(count);
  m.member_counts.resize(count);
  for (auto& c : m.member_counts) c = r.u32();

  auto& c = m.config;
  c.epochs = r.u32();
  c.batch_size = r.u32();
  c.lr = r.f64();
  c.lambda = r.f64();
  c.s_min = r.u32();
  c.mu = r.f64();
  c.seed = r.u64();
  c.rebuild_every = r.u32();
  const std::uint8_t flags = r.u8();
  c.gbc_off = flags & 1;
  c.prune_off = flags & 2;
  c.assign_unpruned = flags & 4;
  c.strict_child_support = flags & 8;
  c.window = m.window_len;
  c.stride = m.stride;
  c.layers = layers;
  c.hidden = h;
  c.decoder_width = width;
  if (!r.at_end()) throw Error(ErrorCode::InvariantViolation, "trailing bytes after model data");
  m.validate();
  return m;
}

void save_model(const GbocModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

GbocModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace gboc
