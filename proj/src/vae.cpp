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

#include "actirep/vae.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "actirep/rng.hpp"
#include "json.hpp"

namespace actirep::vae {

namespace {

using nn::Tape;
using nn::TensorPtr;

constexpr float kLogVarClamp = 20.0f;

TensorPtr<float> map_tensor(const actigram::ActigraphyMap& map) {
  return nn::make_tensor<float>({1, map.days, map.bins_per_day}, map.values);
}

struct EncodeResult {
  TensorPtr<float> mu;
  TensorPtr<float> log_var;
};

EncodeResult encoder_forward(Tape& tape, const VaeModel& model,
                             const TensorPtr<float>& x) {
  const auto& p = model.params;
  auto h1 = tape.relu(tape.conv2d(x, p.at("enc.conv1.w"), p.at("enc.conv1.b"),
                                  2, nn::Padding::Same));
  auto h2 = tape.relu(tape.conv2d(h1, p.at("enc.conv2.w"), p.at("enc.conv2.b"),
                                  2, nn::Padding::Same));
  auto flat = tape.reshape(h2, {static_cast<int>(h2->size())});
  auto hidden =
      tape.relu(tape.dense(flat, p.at("enc.dense.w"), p.at("enc.dense.b")));
  auto mu = tape.dense(hidden, p.at("enc.mu.w"), p.at("enc.mu.b"));
  auto log_var = tape.clamp(
      tape.dense(hidden, p.at("enc.logvar.w"), p.at("enc.logvar.b")),
      -kLogVarClamp, kLogVarClamp);
  return {mu, log_var};
}

TensorPtr<float> decoder_logits(Tape& tape, const VaeModel& model,
                                const TensorPtr<float>& z) {
  const auto& p = model.params;
  const int h4 = model.days / 4;
  const int w4 = model.bins_per_day / 4;
  auto d1 =
      tape.relu(tape.dense(z, p.at("dec.dense1.w"), p.at("dec.dense1.b")));
  auto d2 =
      tape.relu(tape.dense(d1, p.at("dec.dense2.w"), p.at("dec.dense2.b")));
  auto grid = tape.reshape(d2, {model.cfg.enc_filters[1], h4, w4});
  auto t1 = tape.relu(
      tape.conv2d_transpose(grid, p.at("dec.tconv1.w"), p.at("dec.tconv1.b"), 2));
  auto t2 = tape.relu(
      tape.conv2d_transpose(t1, p.at("dec.tconv2.w"), p.at("dec.tconv2.b"), 2));
  return tape.conv2d_transpose(t2, p.at("dec.tconv3.w"), p.at("dec.tconv3.b"),
                               1);
}

void check_map_shape(const VaeModel& model, const actigram::ActigraphyMap& map) {
  require(map.days == model.days && map.bins_per_day == model.bins_per_day,
          ErrorCode::ShapeMismatch,
          "map shape does not match the training shape");
}

}  // namespace

void validate(const VaeConfig& cfg) {
  require(cfg.latent_dim >= 1 && cfg.epochs >= 1 && cfg.batch_size >= 1 &&
              cfg.kl_weight >= 0.0f && cfg.kernel >= 1 && cfg.dense_units >= 1,
          ErrorCode::UsageError, "invalid VAE config");
  require(cfg.dec_filters[2] == 1, ErrorCode::UsageError,
          "final decoder layer must have 1 filter");
}

std::vector<nn::TensorPtr<float>> VaeModel::param_list() const {
  std::vector<nn::TensorPtr<float>> list;
  list.reserve(params.size());
  for (const auto& [name, tensor] : params) list.push_back(tensor);
  return list;
}

VaeModel create_model(const VaeConfig& cfg, int days, int bins_per_day) {
  validate(cfg);
  require(days >= 4 && bins_per_day >= 4 && days % 4 == 0 &&
              bins_per_day % 4 == 0,
          ErrorCode::ShapeMismatch,
          "map sides must be divisible by 4 for the two-stage mirror");
  VaeModel model;
  model.cfg = cfg;
  model.days = days;
  model.bins_per_day = bins_per_day;

  const int h4 = days / 4;
  const int w4 = bins_per_day / 4;
  const int flat = cfg.enc_filters[1] * h4 * w4;
  const int k = cfg.kernel;

  auto init = [&](const std::string& name, nn::LayerSpec spec) {
    auto params = nn::seeded_init<float>(
        spec, derive_seed(cfg.seed, "vae.init." + name));
    model.params["" + name + ".w"] = params[0];
    model.params["" + name + ".b"] = params[1];
  };
  using nn::LayerKind;
  init("enc.conv1", {.kind = LayerKind::Conv2d, .filters = cfg.enc_filters[0],
                     .kernel = k, .stride = 2, .input_channels = 1});
  init("enc.conv2", {.kind = LayerKind::Conv2d, .filters = cfg.enc_filters[1],
                     .kernel = k, .stride = 2,
                     .input_channels = cfg.enc_filters[0]});
  init("enc.dense", {.kind = LayerKind::Dense, .filters = cfg.dense_units,
                     .input_units = flat});
  init("enc.mu", {.kind = LayerKind::Dense, .filters = cfg.latent_dim,
                  .input_units = cfg.dense_units});
  init("enc.logvar", {.kind = LayerKind::Dense, .filters = cfg.latent_dim,
                      .input_units = cfg.dense_units});
  init("dec.dense1", {.kind = LayerKind::Dense, .filters = cfg.dense_units,
                      .input_units = cfg.latent_dim});
  init("dec.dense2", {.kind = LayerKind::Dense, .filters = flat,
                      .input_units = cfg.dense_units});
  init("dec.tconv1", {.kind = LayerKind::Conv2dTranspose,
                      .filters = cfg.dec_filters[0], .kernel = k, .stride = 2,
                      .input_channels = cfg.enc_filters[1]});
  init("dec.tconv2", {.kind = LayerKind::Conv2dTranspose,
                      .filters = cfg.dec_filters[1], .kernel = k, .stride = 2,
                      .input_channels = cfg.dec_filters[0]});
  init("dec.tconv3", {.kind = LayerKind::Conv2dTranspose,
                      .filters = cfg.dec_filters[2], .kernel = k, .stride = 1,
                      .input_channels = cfg.dec_filters[1]});
  return model;
}

VaeModel train_vae(const std::vector<const actigram::ActigraphyMap*>& maps,
                   const VaeConfig& cfg, TrainingLog* log) {
  validate(cfg);
  require(maps.size() >= static_cast<std::size_t>(cfg.batch_size),
          ErrorCode::InsufficientData,
          "need at least batch_size maps, got " + std::to_string(maps.size()));
  for (const auto* map : maps) {
    require(map->days == maps[0]->days &&
                map->bins_per_day == maps[0]->bins_per_day,
            ErrorCode::ShapeHeterogeneity, "maps must share one shape");
  }

  VaeModel model = create_model(cfg, maps[0]->days, maps[0]->bins_per_day);
  const std::vector<TensorPtr<float>> params = model.param_list();
  nn::AdamState adam;
  std::vector<std::vector<float>> grad_accum(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    grad_accum[i].assign(params[i]->data.size(), 0.0f);
  }

  Rng shuffle_rng(derive_seed(cfg.seed, "vae.shuffle"));
  Rng noise_rng(derive_seed(cfg.seed, "vae.noise"));

  std::vector<std::size_t> order(maps.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    double epoch_bce = 0.0;
    double epoch_kl = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          begin + static_cast<std::size_t>(cfg.batch_size), order.size());
      const float inv_batch = 1.0f / static_cast<float>(end - begin);
      for (auto& accum : grad_accum) {
        std::fill(accum.begin(), accum.end(), 0.0f);
      }
      for (std::size_t slot = begin; slot < end; ++slot) {
        const actigram::ActigraphyMap& map = *maps[order[slot]];
        Tape tape;
        auto x = map_tensor(map);
        // Parameters take gradients; the input does not.
        auto [mu, log_var] = encoder_forward(tape, model, x);
        std::vector<float> noise(static_cast<std::size_t>(cfg.latent_dim));
        for (float& value : noise) {
          value = static_cast<float>(noise_rng.normal());
        }
        auto z = tape.reparameterize(mu, log_var, noise);
        auto logits = decoder_logits(tape, model, z);
        auto bce = tape.bce_with_logits_sum(logits, x);
        auto kl = tape.kl_std_normal_sum(mu, log_var);
        auto loss = tape.add(bce, tape.scale(kl, cfg.kl_weight));
        epoch_bce += bce->data[0];
        epoch_kl += kl->data[0];
        epoch_loss += loss->data[0];
        tape.backward(loss);
        for (std::size_t i = 0; i < params.size(); ++i) {
          if (params[i]->grad.empty()) continue;
          for (std::size_t j = 0; j < grad_accum[i].size(); ++j) {
            grad_accum[i][j] += params[i]->grad[j];
          }
        }
      }
      for (auto& accum : grad_accum) {
        for (float& g : accum) g *= inv_batch;
      }
      nn::adam_step(adam, params, grad_accum);
    }
    if (log != nullptr) {
      const double n = static_cast<double>(maps.size());
      log->epoch_mean_loss.push_back(epoch_loss / n);
      log->epoch_mean_reconstruction.push_back(epoch_bce / n);
      log->epoch_mean_kl.push_back(epoch_kl / n);
    }
  }
  return model;
}

LatentCode encode(const VaeModel& model, const actigram::ActigraphyMap& map) {
  check_map_shape(model, map);
  Tape tape(/*recording=*/false);
  auto x = map_tensor(map);
  auto [mu, log_var] = encoder_forward(tape, model, x);
  return LatentCode{mu->data, log_var->data};
}

std::vector<LatentCode> encode_all(
    const VaeModel& model,
    const std::vector<const actigram::ActigraphyMap*>& maps) {
  std::vector<LatentCode> codes;
  codes.reserve(maps.size());
  for (const auto* map : maps) codes.push_back(encode(model, *map));
  return codes;
}

std::vector<float> reparameterize(const LatentCode& code,
                                  const std::vector<float>& noise) {
  require(noise.size() == code.mu.size(), ErrorCode::LengthMismatch,
          "noise length must equal latent_dim");
  std::vector<float> z(code.mu.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = code.mu[i] + std::exp(0.5f * code.log_var[i]) * noise[i];
  }
  return z;
}

std::vector<float> decode(const VaeModel& model, const std::vector<float>& z) {
  require(z.size() == static_cast<std::size_t>(model.cfg.latent_dim),
          ErrorCode::LengthMismatch, "z length must equal latent_dim");
  Tape tape(/*recording=*/false);
  auto z_tensor = nn::make_tensor<float>({model.cfg.latent_dim}, z);
  auto logits = decoder_logits(tape, model, z_tensor);
  auto probs = tape.sigmoid(logits);
  return probs->data;
}

double reconstruction_bce(const VaeModel& model,
                          const actigram::ActigraphyMap& map) {
  const LatentCode code = encode(model, map);
  const std::vector<float> probs = decode(model, code.mu);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    const double t = map.values[i];
    acc += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
  }
  return acc / static_cast<double>(probs.size());
}

double kl_closed_form(const std::vector<float>& mu,
                      const std::vector<float>& log_var) {
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double m = mu[i];
    const double lv = log_var[i];
    acc += -0.5 * (1.0 + lv - m * m - std::exp(lv));
  }
  return acc;
}

std::vector<float> traversal_values(float lo, float hi, int steps) {
  std::vector<float> values(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    values[i] = lo + (hi - lo) * static_cast<float>(i) /
                         static_cast<float>(steps - 1);
  }
  return values;
}

std::vector<std::vector<float>> traverse_row(const VaeModel& model,
                                             const LatentCode& base_code,
                                             int dim, float lo, float hi,
                                             int steps) {
  require(dim >= 0 && dim < model.cfg.latent_dim, ErrorCode::DimOutOfRange,
          "latent dimension " + std::to_string(dim));
  require(lo < hi && steps >= 2, ErrorCode::UsageError,
          "need lo < hi and steps >= 2");
  std::vector<std::vector<float>> row;
  row.reserve(static_cast<std::size_t>(steps));
  for (float value : traversal_values(lo, hi, steps)) {
    std::vector<float> z = base_code.mu;
    z[static_cast<std::size_t>(dim)] = value;
    row.push_back(decode(model, z));
  }
  return row;
}

void render_traversal_grid(const VaeModel& model, const LatentCode& base_code,
                           float lo, float hi, int steps,
                           const std::filesystem::path& path) {
  const int tile_h = model.days;
  const int tile_w = model.bins_per_day;
  const int rows = model.cfg.latent_dim;
  const int height = rows * tile_h + (rows - 1);
  const int width = steps * tile_w + (steps - 1);
  std::vector<std::uint8_t> image(
      static_cast<std::size_t>(height) * width, 255);
  for (int dim = 0; dim < rows; ++dim) {
    const auto row = traverse_row(model, base_code, dim, lo, hi, steps);
    for (int step = 0; step < steps; ++step) {
      const std::vector<float>& tile = row[static_cast<std::size_t>(step)];
      const int y0 = dim * (tile_h + 1);
      const int x0 = step * (tile_w + 1);
      for (int y = 0; y < tile_h; ++y) {
        for (int x = 0; x < tile_w; ++x) {
          image[static_cast<std::size_t>(y0 + y) * width + x0 + x] =
              static_cast<std::uint8_t>(
                  std::lround(tile[static_cast<std::size_t>(y) * tile_w + x] *
                              255.0f));
        }
      }
    }
  }
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoError, "cannot open " + path.string());
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data()),
            static_cast<std::streamsize>(image.size()));
  require(out.good(), ErrorCode::IoError, "write failed for " + path.string());
}

std::map<BinaryClass, ClassLatentStats> fit_class_stats(
    const std::vector<std::pair<LatentCode, BinaryClass>>& codes) {
  std::map<BinaryClass, std::vector<const LatentCode*>> by_label;
  for (const auto& [code, label] : codes) by_label[label].push_back(&code);

  std::map<BinaryClass, ClassLatentStats> stats;
  for (const auto& [label, group] : by_label) {
    require(group.size() >= 2, ErrorCode::InsufficientClassData,
            std::string("need >= 2 codes for label ") +
                binary_class_name(label));
    const std::size_t dim = group.front()->mu.size();
    ClassLatentStats entry;
    entry.label = label;
    entry.mean.assign(dim, 0.0f);
    entry.variance.assign(dim, 0.0f);
    for (const LatentCode* code : group) {
      for (std::size_t d = 0; d < dim; ++d) entry.mean[d] += code->mu[d];
    }
    for (float& value : entry.mean) {
      value /= static_cast<float>(group.size());
    }
    for (const LatentCode* code : group) {
      for (std::size_t d = 0; d < dim; ++d) {
        const float centered = code->mu[d] - entry.mean[d];
        entry.variance[d] += centered * centered;
      }
    }
    for (float& value : entry.variance) {
      value /= static_cast<float>(group.size());
    }
    stats.emplace(label, std::move(entry));
  }
  return stats;
}

std::vector<LabeledMap> generate(const VaeModel& model,
                                 const ClassLatentStats& stats, int n,
                                 std::uint64_t seed) {
  require(n >= 1, ErrorCode::UsageError, "n must be >= 1");
  Rng rng(seed);
  std::vector<LabeledMap> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<float> z(stats.mean.size());
    for (std::size_t d = 0; d < z.size(); ++d) {
      z[d] = stats.mean[d] +
             std::sqrt(std::max(stats.variance[d], 0.0f)) *
                 static_cast<float>(rng.normal());
    }
    LabeledMap labeled;
    labeled.label = stats.label;
    labeled.map.days = model.days;
    labeled.map.bins_per_day = model.bins_per_day;
    labeled.map.values = decode(model, z);
    char id[64];
    std::snprintf(id, sizeof(id), "synth_%s_%04d",
                  binary_class_name(stats.label), i);
    labeled.map.participant_id = id;
    out.push_back(std::move(labeled));
  }
  return out;
}

void save_model(const VaeModel& model, const std::filesystem::path& path) {
  nn::save_checkpoint(model.params, path);
  nlohmann::ordered_json sidecar;
  sidecar["model"] = "vae";
  sidecar["latent_dim"] = model.cfg.latent_dim;
  sidecar["enc_filters"] = model.cfg.enc_filters;
  sidecar["dec_filters"] = model.cfg.dec_filters;
  sidecar["kernel"] = model.cfg.kernel;
  sidecar["dense_units"] = model.cfg.dense_units;
  sidecar["epochs"] = model.cfg.epochs;
  sidecar["batch_size"] = model.cfg.batch_size;
  sidecar["kl_weight"] = model.cfg.kl_weight;
  sidecar["seed"] = model.cfg.seed;
  sidecar["days"] = model.days;
  sidecar["bins_per_day"] = model.bins_per_day;
  std::ofstream out(path.string() + ".json");
  require(out.good(), ErrorCode::IoError,
          "cannot open " + path.string() + ".json");
  out << sidecar.dump(2) << "\n";
}

VaeModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path.string() + ".json");
  require(in.good(), ErrorCode::IoError,
          "cannot open " + path.string() + ".json");
  nlohmann::json sidecar = nlohmann::json::parse(in);
  VaeModel model;
  model.cfg.latent_dim = sidecar.at("latent_dim").get<int>();
  model.cfg.enc_filters = sidecar.at("enc_filters").get<std::array<int, 2>>();
  model.cfg.dec_filters = sidecar.at("dec_filters").get<std::array<int, 3>>();
  model.cfg.kernel = sidecar.at("kernel").get<int>();
  model.cfg.dense_units = sidecar.at("dense_units").get<int>();
  model.cfg.epochs = sidecar.at("epochs").get<int>();
  model.cfg.batch_size = sidecar.at("batch_size").get<int>();
  model.cfg.kl_weight = sidecar.at("kl_weight").get<float>();
  model.cfg.seed = sidecar.at("seed").get<std::uint64_t>();
  model.days = sidecar.at("days").get<int>();
  model.bins_per_day = sidecar.at("bins_per_day").get<int>();
  model.params = nn::load_checkpoint(path);
  return model;
}

void write_latent_csv(const std::vector<std::string>& participant_ids,
                      const std::vector<LatentCode>& codes,
                      const std::filesystem::path& path) {
  require(participant_ids.size() == codes.size(), ErrorCode::LengthMismatch,
          "ids and codes differ in length");
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot open " + path.string());
  const std::size_t dim = codes.empty() ? 0 : codes.front().mu.size();
  out << "participant_id";
  for (std::size_t d = 1; d <= dim; ++d) out << ",mu_" << d;
  for (std::size_t d = 1; d <= dim; ++d) out << ",logvar_" << d;
  out << "\n";
  char buffer[48];
  for (std::size_t i = 0; i < codes.size(); ++i) {
    out << participant_ids[i];
    for (float value : codes[i].mu) {
      std::snprintf(buffer, sizeof(buffer), ",%.9g", value);
      out << buffer;
    }
    for (float value : codes[i].log_var) {
      std::snprintf(buffer, sizeof(buffer), ",%.9g", value);
      out << buffer;
    }
    out << "\n";
  }
  require(out.good(), ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<std::pair<std::string, LatentCode>> read_latent_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::EmptyFile,
          path.string());
  // Column count determines the latent dimension.
  const std::size_t columns =
      static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  require(columns % 2 == 0, ErrorCode::MalformedRow,
          "latent csv must have equal mu/logvar columns");
  const std::size_t dim = columns / 2;
  std::vector<std::pair<std::string, LatentCode>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    LatentCode code;
    code.mu.reserve(dim);
    code.log_var.reserve(dim);
    std::pair<std::string, LatentCode> entry{field, {}};
    for (std::size_t d = 0; d < dim; ++d) {
      std::getline(row, field, ',');
      entry.second.mu.push_back(std::stof(field));
    }
    for (std::size_t d = 0; d < dim; ++d) {
      std::getline(row, field, ',');
      entry.second.log_var.push_back(std::stof(field));
    }
    rows.push_back(std::move(entry));
  }
  return rows;
}

}  // namespace actirep::vae
