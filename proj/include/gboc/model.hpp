#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gboc/matrix.hpp"
#include "gboc/neural.hpp"
#include "gboc/tsdata.hpp"

namespace gboc {

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double lr = 1e-4;
  double lambda = 0.5;
  std::size_t window = 5;
  std::size_t stride = 1;
  std::size_t layers = 3;
  std::size_t hidden = 32;
  std::size_t decoder_width = 64;
  std::size_t s_min = 8;
  double mu = 2.0;
  std::uint64_t seed = 2024;
  std::size_t rebuild_every = 1;
  // Ablations and alternative readings.
  bool gbc_off = false;          // k-means centers (k = floor(sqrt(N))) instead of granular-balls
  bool prune_off = false;        // keep diffuse balls
  bool assign_unpruned = false;  // training assignment against the unpruned set
  bool strict_child_support = false;  // split children need >= s_min members

  void validate() const;  // throws BadParams

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

inline constexpr std::uint32_t kModelVersion = 1;

struct GbocModel {
  std::uint32_t version = kModelVersion;
  std::size_t window_len = 0;
  std::size_t stride = 1;
  std::size_t channels = 0;  // d
  NormStats norm;
  Network net;
  Matrix centers;  // M x d'
  std::vector<double> radii;
  std::vector<std::uint32_t> member_counts;
  TrainConfig config;

  std::size_t latent_dim() const { return net.encoder.latent_dim(); }

  // Throws InvariantViolation when the bundle is inconsistent.
  void validate() const;

  friend bool operator==(const GbocModel&, const GbocModel&) = default;
};

// Little-endian binary layout, see README ("Model file").
std::vector<std::uint8_t> serialize_model(const GbocModel& model);
GbocModel deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const GbocModel& model, const std::filesystem::path& path);
GbocModel load_model(const std::filesystem::path& path);

}  // namespace gboc
