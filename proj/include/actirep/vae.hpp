/*
 * Copyright 2026 The Actirep Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ACTIREP_VAE_HPP_
#define ACTIREP_VAE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "actirep/actigram.hpp"
#include "actirep/common.hpp"
#include "actirep/nncore.hpp"

namespace actirep::vae {

struct VaeConfig {
  int latent_dim = 8;
  std::array<int, 2> enc_filters{16, 32};
  std::array<int, 3> dec_filters{32, 16, 1};
  int kernel = 3;
  int dense_units = 16;
  int epochs = 30;
  int batch_size = 128;
  float kl_weight = 1.0f;
  std::uint64_t seed = 0;
};

void validate(const VaeConfig& cfg);

struct LatentCode {
  std::vector<float> mu;
  std::vector<float> log_var;
};

struct ClassLatentStats {
  BinaryClass label = BinaryClass::Healthy;
  std::vector<float> mean;
  std::vector<float> variance;  // diagonal covariance
};

struct LabeledMap {
  actigram::ActigraphyMap map;
  BinaryClass label = BinaryClass::Healthy;
};

// Encoder: conv(16,k3,s2) -> conv(32,k3,s2) -> dense(16) -> mu/logvar heads.
// Decoder mirror: dense(16) -> dense(C*h/4*w/4) -> tconv(32,s2) ->
// tconv(16,s2) -> tconv(1,s1) -> sigmoid. Map sides must be divisible by 4 so
// the decoder restores the input shape exactly.
struct VaeModel {
  VaeConfig cfg;
  int days = 0;
  int bins_per_day = 0;
  std::map<std::string, nn::TensorPtr<float>> params;

  std::vector<nn::TensorPtr<float>> param_list() const;
};

VaeModel create_model(const VaeConfig& cfg, int days, int bins_per_day);

struct TrainingLog {
  std::vector<double> epoch_mean_loss;
  std::vector<double> epoch_mean_reconstruction;
  std::vector<double> epoch_mean_kl;
};

// Unsupervised training: per-map loss is summed-over-pixels binary
// cross-entropy plus kl_weight * KL(N(mu, sigma^2) || N(0, I)), mini-batches
// shuffled per epoch with a seeded RNG.
VaeModel train_vae(const std::vector<const actigram::ActigraphyMap*>& maps,
                   const VaeConfig& cfg, TrainingLog* log = nullptr);

// Deterministic posterior parameters (no sampling).
LatentCode encode(const VaeModel& model, const actigram::ActigraphyMap& map);
std::vector<LatentCode> encode_all(
    const VaeModel& model,
    const std::vector<const actigram::ActigraphyMap*>& maps);

// z = mu + exp(log_var / 2) * noise.
std::vector<float> reparameterize(const LatentCode& code,
                                  const std::vector<float>& noise);

// Sigmoid decoder output, elementwise in (0, 1); training map shape.
std::vector<float> decode(const VaeModel& model, const std::vector<float>& z);

// Mean per-pixel binary cross-entropy of the deterministic encode->decode
// reconstruction.
double reconstruction_bce(const VaeModel& model,
                          const actigram::ActigraphyMap& map);

// Closed-form KL of N(mu, exp(log_var)) from the standard normal.
double kl_closed_form(const std::vector<float>& mu,
                      const std::vector<float>& log_var);

// The traversal sweep: exactly linspace(lo, hi, steps).
std::vector<float> traversal_values(float lo, float hi, int steps);

// One traversal row: z[dim] sweeps linspace(lo, hi, steps) with the other
// coordinates fixed at the base mu. Each entry is a decoded map.
std::vector<std::vector<float>> traverse_row(const VaeModel& model,
                                             const LatentCode& base_code,
                                             int dim, float lo, float hi,
                                             int steps);

// Full grid (one row per latent dimension) as a PGM with 1-pixel white
// gutters between tiles.
void render_traversal_grid(const VaeModel& model, const LatentCode& base_code,
                           float lo, float hi, int steps,
                           const std::filesystem::path& path);

// Per-label mean and diagonal covariance of mu vectors. Requires at least 2
// codes for each label present.
std::map<BinaryClass, ClassLatentStats> fit_class_stats(
    const std::vector<std::pair<LatentCode, BinaryClass>>& codes);

// Draws z ~ N(mean, diag(variance)) with the given seed and decodes n maps
// labeled with stats.label.
std::vector<LabeledMap> generate(const VaeModel& model,
                                 const ClassLatentStats& stats, int n,
                                 std::uint64_t seed);

// NNCK checkpoint plus a JSON sidecar (<path>.json) carrying the config and
// map shape.
void save_model(const VaeModel& model, const std::filesystem::path& path);
VaeModel load_model(const std::filesystem::path& path);

// CSV export, header `participant_id,mu_1..mu_D,logvar_1..logvar_D`.
void write_latent_csv(const std::vector<std::string>& participant_ids,
                      const std::vector<LatentCode>& codes,
                      const std::filesystem::path& path);
std::vector<std::pair<std::string, LatentCode>> read_latent_csv(
    const std::filesystem::path& path);

}  // namespace actirep::vae

#endif  // ACTIREP_VAE_HPP_
