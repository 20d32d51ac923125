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

#include "actirep/cnnlstm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "actirep/rng.hpp"
#include "json.hpp"

namespace actirep::cnnlstm {

namespace {

using nn::Tape;
using nn::TensorPtr;

// Logit of the outcome probability for one map.
TensorPtr<float> forward_logit(Tape& tape, const CnnLstmModel& model,
                               const actigram::ActigraphyMap& map) {
  const auto& p = model.params;
  auto map2d =
      nn::make_tensor<float>({map.days, map.bins_per_day}, map.values);
  auto hidden = nn::make_tensor<float>({model.cfg.lstm_units});
  auto cell = nn::make_tensor<float>({model.cfg.lstm_units});
  TensorPtr<float> h = hidden;
  TensorPtr<float> c = cell;
  for (int day = 0; day < map.days; ++day) {
    auto day_vec = tape.slice_row(map2d, day);
    auto day_channels = tape.reshape(day_vec, {1, map.bins_per_day});
    auto conv = tape.relu(tape.conv1d(day_channels, p.at("conv.w"),
                                      p.at("conv.b"), 2, nn::Padding::Same));
    auto embedding = tape.global_avg_pool(conv);
    auto [h_next, c_next] = tape.lstm_cell(embedding, h, c, p.at("lstm.w"),
                                           p.at("lstm.u"), p.at("lstm.b"));
    h = h_next;
    c = c_next;
  }
  auto head = tape.relu(tape.dense(h, p.at("head1.w"), p.at("head1.b")));
  return tape.dense(head, p.at("head2.w"), p.at("head2.b"));
}

void check_shape(const CnnLstmModel& model, const actigram::ActigraphyMap& map) {
  require(map.days == model.days && map.bins_per_day == model.bins_per_day,
          ErrorCode::ShapeMismatch,
          "map shape does not match the training shape");
}

}  // namespace

void validate(const CnnLstmConfig& cfg) {
  require(cfg.conv_filters >= 1 && cfg.kernel >= 1 && cfg.lstm_units >= 1 &&
              cfg.dense_units >= 1 && cfg.epochs >= 1 && cfg.batch_size >= 1 &&
              cfg.learning_rate > 0.0f,
          ErrorCode::UsageError, "invalid CNN-LSTM config");
}

std::vector<nn::TensorPtr<float>> CnnLstmModel::param_list() const {
  std::vector<nn::TensorPtr<float>> list;
  list.reserve(params.size());
  for (const auto& [name, tensor] : params) list.push_back(tensor);
  return list;
}

CnnLstmModel create_model(const CnnLstmConfig& cfg, int days,
                          int bins_per_day) {
  validate(cfg);
  require(days >= 1 && bins_per_day >= 1, ErrorCode::ShapeMismatch,
          "empty map shape");
  CnnLstmModel model;
  model.cfg = cfg;
  model.days = days;
  model.bins_per_day = bins_per_day;

  using nn::LayerKind;
  auto init = [&](const std::string& name, nn::LayerSpec spec) {
    return nn::seeded_init<float>(spec,
                                  derive_seed(cfg.seed, "cnnlstm.init." + name));
  };
  auto conv = init("conv", {.kind = LayerKind::Conv1d,
                            .filters = cfg.conv_filters, .kernel = cfg.kernel,
                            .stride = 2, .input_channels = 1});
  model.params["conv.w"] = conv[0];
  model.params["conv.b"] = conv[1];
  auto lstm = init("lstm", {.kind = LayerKind::Lstm, .filters = cfg.lstm_units,
                            .input_units = cfg.conv_filters});
  model.params["lstm.w"] = lstm[0];
  model.params["lstm.u"] = lstm[1];
  model.params["lstm.b"] = lstm[2];
  auto head1 = init("head1", {.kind = LayerKind::Dense,
                              .filters = cfg.dense_units,
                              .input_units = cfg.lstm_units});
  model.params["head1.w"] = head1[0];
  model.params["head1.b"] = head1[1];
  auto head2 = init("head2", {.kind = LayerKind::Dense, .filters = 1,
                              .input_units = cfg.dense_units});
  model.params["head2.w"] = head2[0];
  model.params["head2.b"] = head2[1];
  return model;
}

TrainResult train_cnnlstm(const std::vector<LabeledMapRef>& examples,
                          const CnnLstmConfig& cfg,
                          const std::vector<LabeledMapRef>& validation,
                          int epochs_override) {
  validate(cfg);
  require(!examples.empty(), ErrorCode::InsufficientData, "no training maps");
  bool has_healthy = false;
  bool has_unhealthy = false;
  for (const auto& [map, label] : examples) {
    require(map->days == examples[0].first->days &&
                map->bins_per_day == examples[0].first->bins_per_day,
            ErrorCode::ShapeHeterogeneity, "maps must share one shape");
    (label == BinaryClass::Healthy ? has_healthy : has_unhealthy) = true;
  }
  require(has_healthy && has_unhealthy, ErrorCode::SingleClassData,
          "training set must contain both classes");

  CnnLstmModel model = create_model(cfg, examples[0].first->days,
                                    examples[0].first->bins_per_day);
  const std::vector<TensorPtr<float>> params = model.param_list();
  nn::AdamState adam;
  adam.learning_rate = cfg.learning_rate;
  std::vector<std::vector<float>> grad_accum(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    grad_accum[i].assign(params[i]->data.size(), 0.0f);
  }

  Rng shuffle_rng(derive_seed(cfg.seed, "cnnlstm.shuffle"));
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  const int epochs = epochs_override > 0 ? epochs_override : cfg.epochs;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_bce = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          begin + static_cast<std::size_t>(cfg.batch_size), order.size());
      const float inv_batch = 1.0f / static_cast<float>(end - begin);
      for (auto& accum : grad_accum) {
        std::fill(accum.begin(), accum.end(), 0.0f);
      }
      for (std::size_t slot = begin; slot < end; ++slot) {
        const auto& [map, label] = examples[order[slot]];
        Tape tape;
        auto logit = forward_logit(tape, model, *map);
        auto target = nn::make_tensor<float>(
            {1}, std::vector<float>{
                     label == BinaryClass::Unhealthy ? 1.0f : 0.0f});
        auto loss = tape.bce_with_logits_sum(logit, target);
        epoch_bce += loss->data[0];
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
    result.epoch_train_bce.push_back(epoch_bce /
                                     static_cast<double>(examples.size()));
    if (!validation.empty()) {
      result.epoch_validation_bce.push_back(evaluate_bce(model, validation));
    }
  }
  result.model = std::move(model);
  return result;
}

TrainResult train_with_augmentation(
    const std::vector<LabeledMapRef>& real_examples,
    const std::vector<const vae::LabeledMap*>& synthetic,
    const CnnLstmConfig& cfg, const std::vector<LabeledMapRef>& validation,
    int epochs_override) {
  std::vector<LabeledMapRef> combined = real_examples;
  combined.reserve(real_examples.size() + synthetic.size());
  for (const vae::LabeledMap* labeled : synthetic) {
    combined.emplace_back(&labeled->map, labeled->label);
  }
  return train_cnnlstm(combined, cfg, validation, epochs_override);
}

double predict(const CnnLstmModel& model, const actigram::ActigraphyMap& map) {
  check_shape(model, map);
  Tape tape(/*recording=*/false);
  auto logit = forward_logit(tape, model, map);
  auto prob = tape.sigmoid(logit);
  return static_cast<double>(prob->data[0]);
}

double evaluate_bce(const CnnLstmModel& model,
                    const std::vector<LabeledMapRef>& examples) {
  double acc = 0.0;
  for (const auto& [map, label] : examples) {
    const double p = predict(model, *map);
    const double t = label == BinaryClass::Unhealthy ? 1.0 : 0.0;
    acc += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
  }
  return acc / static_cast<double>(examples.size());
}

void save_model(const CnnLstmModel& model, const std::filesystem::path& path) {
  nn::save_checkpoint(model.params, path);
  nlohmann::ordered_json sidecar;
  sidecar["model"] = "cnnlstm";
  sidecar["conv_filters"] = model.cfg.conv_filters;
  sidecar["kernel"] = model.cfg.kernel;
  sidecar["lstm_units"] = model.cfg.lstm_units;
  sidecar["dense_units"] = model.cfg.dense_units;
  sidecar["epochs"] = model.cfg.epochs;
  sidecar["batch_size"] = model.cfg.batch_size;
  sidecar["seed"] = model.cfg.seed;
  sidecar["learning_rate"] = model.cfg.learning_rate;
  sidecar["days"] = model.days;
  sidecar["bins_per_day"] = model.bins_per_day;
  std::ofstream out(path.string() + ".json");
  require(out.good(), ErrorCode::IoError,
          "cannot open " + path.string() + ".json");
  out << sidecar.dump(2) << "\n";
}

CnnLstmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path.string() + ".json");
  require(in.good(), ErrorCode::IoError,
          "cannot open " + path.string() + ".json");
  nlohmann::json sidecar = nlohmann::json::parse(in);
  CnnLstmModel model;
  model.cfg.conv_filters = sidecar.at("conv_filters").get<int>();
  model.cfg.kernel = sidecar.at("kernel").get<int>();
  model.cfg.lstm_units = sidecar.at("lstm_units").get<int>();
  model.cfg.dense_units = sidecar.at("dense_units").get<int>();
  model.cfg.epochs = sidecar.at("epochs").get<int>();
  model.cfg.batch_size = sidecar.at("batch_size").get<int>();
  model.cfg.seed = sidecar.at("seed").get<std::uint64_t>();
  model.cfg.learning_rate = sidecar.at("learning_rate").get<float>();
  model.days = sidecar.at("days").get<int>();
  model.bins_per_day = sidecar.at("bins_per_day").get<int>();
  model.params = nn::load_checkpoint(path);
  return model;
}

}  // namespace actirep::cnnlstm
