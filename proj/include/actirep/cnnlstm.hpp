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

#ifndef ACTIREP_CNNLSTM_HPP_
#define ACTIREP_CNNLSTM_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "actirep/actigram.hpp"
#include "actirep/common.hpp"
#include "actirep/nncore.hpp"
#include "actirep/vae.hpp"

namespace actirep::cnnlstm {

struct CnnLstmConfig {
  int conv_filters = 32;
  int kernel = 3;
  int lstm_units = 20;
  int dense_units = 20;
  int epochs = 30;
  int batch_size = 32;
  std::uint64_t seed = 0;
  float learning_rate = 1e-3f;
};

void validate(const CnnLstmConfig& cfg);

using LabeledMapRef = std::pair<const actigram::ActigraphyMap*, BinaryClass>;

// Each day of the map passes through a shared conv1d(32,k3,s2,same) -> ReLU
// -> global average pool; an LSTM(20) consumes the day embeddings; the final
// hidden state feeds dense(20,ReLU) -> dense(1,sigmoid).
struct CnnLstmModel {
  CnnLstmConfig cfg;
  int days = 0;
  int bins_per_day = 0;
  std::map<std::string, nn::TensorPtr<float>> params;

  std::vector<nn::TensorPtr<float>> param_list() const;
};

CnnLstmModel create_model(const CnnLstmConfig& cfg, int days, int bins_per_day);

struct TrainResult {
  CnnLstmModel model;
  std::vector<double> epoch_train_bce;       // mean per-example BCE
  std::vector<double> epoch_validation_bce;  // empty without a validation set
};

// Supervised training with binary cross-entropy. `epochs_override`, when
// > 0, replaces cfg.epochs (used by the internal-CV epoch selection).
TrainResult train_cnnlstm(const std::vector<LabeledMapRef>& examples,
                          const CnnLstmConfig& cfg,
                          const std::vector<LabeledMapRef>& validation = {},
                          int epochs_override = 0);

// Training set = real + synthetic; synthetic maps never enter validation.
// With an empty synthetic set this is identical to train_cnnlstm under the
// same seed.
TrainResult train_with_augmentation(
    const std::vector<LabeledMapRef>& real_examples,
    const std::vector<const vae::LabeledMap*>& synthetic,
    const CnnLstmConfig& cfg,
    const std::vector<LabeledMapRef>& validation = {},
    int epochs_override = 0);

// Deterministic probability in (0, 1).
double predict(const CnnLstmModel& model, const actigram::ActigraphyMap& map);

// Mean per-example BCE of predictions on a labeled set.
double evaluate_bce(const CnnLstmModel& model,
                    const std::vector<LabeledMapRef>& examples);

void save_model(const CnnLstmModel& model, const std::filesystem::path& path);
CnnLstmModel load_model(const std::filesystem::path& path);

}  // namespace actirep::cnnlstm

#endif  // ACTIREP_CNNLSTM_HPP_
