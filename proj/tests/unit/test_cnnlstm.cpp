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
#include <filesystem>

#include "actirep/common.hpp"
#include "actirep/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace actirep;
using actigram::ActigraphyMap;
using cnnlstm::CnnLstmConfig;
using cnnlstm::LabeledMapRef;

namespace {

std::vector<ActigraphyMap> labeled_cohort(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ActigraphyMap> maps;
  for (int i = 0; i < n; ++i) {
    ActigraphyMap map;
    map.participant_id = "c" + std::to_string(i);
    map.days = 8;
    map.bins_per_day = 16;
    map.values.resize(8 * 16);
    const bool unhealthy = i % 2 == 1;
    const double amplitude = unhealthy ? 0.3 : 0.8;
    for (int d = 0; d < 8; ++d) {
      for (int b = 0; b < 16; ++b) {
        const double wave =
            std::max(0.0, std::sin(2.0 * 3.14159265 * b / 16.0));
        map.at(d, b) = static_cast<float>(std::clamp(
            amplitude * wave + 0.05 * rng.uniform01(), 0.0, 1.0));
      }
    }
    maps.push_back(std::move(map));
  }
  return maps;
}

std::vector<LabeledMapRef> refs(const std::vector<ActigraphyMap>& maps) {
  std::vector<LabeledMapRef> out;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    out.emplace_back(&maps[i], i % 2 == 1 ? BinaryClass::Unhealthy
                                          : BinaryClass::Healthy);
  }
  return out;
}

CnnLstmConfig small_cfg(std::uint64_t seed) {
  CnnLstmConfig cfg;
  cfg.conv_filters = 8;
  cfg.lstm_units = 6;
  cfg.dense_units = 6;
  cfg.epochs = 5;
  cfg.batch_size = 16;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE("cnnlstm") {

TEST_CASE("day slicing partitions the map exactly") {
  auto maps = labeled_cohort(1, 3);
  const ActigraphyMap& map = maps[0];
  nn::Tape tape(false);
  auto map2d = nn::make_tensor<float>({map.days, map.bins_per_day}, map.values);
  std::vector<float> rebuilt;
  for (int d = 0; d < map.days; ++d) {
    auto day = tape.slice_row(map2d, d);
    rebuilt.insert(rebuilt.end(), day->data.begin(), day->data.end());
  }
  CHECK(rebuilt == map.values);
}

TEST_CASE("zero-weight model predicts exactly one half") {
  auto model = cnnlstm::create_model(small_cfg(1), 8, 16);
  for (auto& [name, tensor] : model.params) {
    std::fill(tensor->data.begin(), tensor->data.end(), 0.0f);
  }
  auto maps = labeled_cohort(1, 5);
  CHECK(cnnlstm::predict(model, maps[0]) == 0.5);
}

TEST_CASE("prediction is a stable probability") {
  auto maps = labeled_cohort(8, 7);
  const auto result = cnnlstm::train_cnnlstm(refs(maps), small_cfg(2));
  const double p = cnnlstm::predict(result.model, maps[0]);
  CHECK(p > 0.0);
  CHECK(p < 1.0);
  CHECK(cnnlstm::predict(result.model, maps[0]) == p);

  ActigraphyMap wrong;
  wrong.days = 4;
  wrong.bins_per_day = 16;
  wrong.values.assign(64, 0.0f);
  CHECK_THROWS_AS(cnnlstm::predict(result.model, wrong), Error);
}

TEST_CASE("training learns the toy separation") {
  auto maps = labeled_cohort(64, 11);
  CnnLstmConfig cfg = small_cfg(13);
  cfg.epochs = 8;
  const auto result = cnnlstm::train_cnnlstm(refs(maps), cfg);
  REQUIRE(result.epoch_train_bce.size() == 8);
  CHECK(result.epoch_train_bce.back() < result.epoch_train_bce.front());
}

TEST_CASE("single class data is rejected") {
  auto maps = labeled_cohort(6, 17);
  std::vector<LabeledMapRef> one_class;
  for (const auto& map : maps) {
    one_class.emplace_back(&map, BinaryClass::Healthy);
  }
  CHECK_THROWS_AS(cnnlstm::train_cnnlstm(one_class, small_cfg(3)), Error);
}

TEST_CASE("same seed reproduces final weights bitwise") {
  auto maps = labeled_cohort(16, 19);
  const auto a = cnnlstm::train_cnnlstm(refs(maps), small_cfg(23));
  const auto b = cnnlstm::train_cnnlstm(refs(maps), small_cfg(23));
  for (const auto& [name, tensor] : a.model.params) {
    CHECK(tensor->data == b.model.params.at(name)->data);
  }
}

TEST_CASE("empty synthetic set reduces to plain training") {
  auto maps = labeled_cohort(16, 29);
  const auto plain = cnnlstm::train_cnnlstm(refs(maps), small_cfg(31));
  const auto augmented =
      cnnlstm::train_with_augmentation(refs(maps), {}, small_cfg(31));
  for (const auto& [name, tensor] : plain.model.params) {
    CHECK(tensor->data == augmented.model.params.at(name)->data);
  }
}

TEST_CASE("augmentation consumes the synthetic training set") {
  auto maps = labeled_cohort(16, 37);
  std::vector<vae::LabeledMap> synthetic(4);
  Rng rng(39);
  for (std::size_t i = 0; i < synthetic.size(); ++i) {
    synthetic[i].label =
        i % 2 == 0 ? BinaryClass::Healthy : BinaryClass::Unhealthy;
    synthetic[i].map = maps[i];
    synthetic[i].map.participant_id = "synth_" + std::to_string(i);
    for (float& v : synthetic[i].map.values) {
      v = static_cast<float>(rng.uniform01());
    }
  }
  std::vector<const vae::LabeledMap*> synth_ptrs;
  for (const auto& labeled : synthetic) synth_ptrs.push_back(&labeled);
  const auto plain = cnnlstm::train_cnnlstm(refs(maps), small_cfg(41));
  const auto augmented =
      cnnlstm::train_with_augmentation(refs(maps), synth_ptrs, small_cfg(41));
  bool weights_differ = false;
  for (const auto& [name, tensor] : plain.model.params) {
    weights_differ |= tensor->data != augmented.model.params.at(name)->data;
  }
  CHECK(weights_differ);
}

TEST_CASE("validation curve is recorded per epoch") {
  auto maps = labeled_cohort(24, 43);
  auto all = refs(maps);
  std::vector<LabeledMapRef> train(all.begin(), all.begin() + 16);
  std::vector<LabeledMapRef> validation(all.begin() + 16, all.end());
  const auto result =
      cnnlstm::train_cnnlstm(train, small_cfg(47), validation);
  CHECK(result.epoch_validation_bce.size() == result.epoch_train_bce.size());
  for (double bce : result.epoch_validation_bce) CHECK(bce > 0.0);
}

TEST_CASE("downscaled gradient check vs finite differences") {
  // 4 conv filters, 2 LSTM units, 3-day maps, in the 64-bit path.
  Rng rng(53);
  const int days = 3;
  const int bins = 8;
  const int filters = 4;
  const int units = 2;
  auto map2d = nn::make_tensor<double>({days, bins});
  for (double& v : map2d->data) v = rng.uniform01();
  auto conv_w = nn::make_tensor<double>({filters, 1, 3}, true);
  auto conv_b = nn::make_tensor<double>({filters}, true);
  auto lstm_w = nn::make_tensor<double>({4 * units, filters}, true);
  auto lstm_u = nn::make_tensor<double>({4 * units, units}, true);
  auto lstm_b = nn::make_tensor<double>({4 * units}, true);
  auto head_w = nn::make_tensor<double>({1, units}, true);
  auto head_b = nn::make_tensor<double>({1}, true);
  for (auto& tensor : {conv_w, lstm_w, lstm_u, head_w}) {
    for (double& v : tensor->data) v = rng.uniform(-0.5, 0.5);
  }
  auto target = nn::make_tensor<double>({1}, std::vector<double>{1.0});

  auto build_loss = [&](nn::TapeT<double>& tape) {
    auto h = nn::make_tensor<double>({units});
    auto c = nn::make_tensor<double>({units});
    nn::TensorPtr<double> hidden = h;
    nn::TensorPtr<double> cell = c;
    for (int d = 0; d < days; ++d) {
      auto day = tape.reshape(tape.slice_row(map2d, d), {1, bins});
      auto conv = tape.relu(
          tape.conv1d(day, conv_w, conv_b, 2, nn::Padding::Same));
      auto embedding = tape.global_avg_pool(conv);
      auto [hn, cn] =
          tape.lstm_cell(embedding, hidden, cell, lstm_w, lstm_u, lstm_b);
      hidden = hn;
      cell = cn;
    }
    auto logit = tape.dense(hidden, head_w, head_b);
    return tape.bce_with_logits_sum(logit, target);
  };

  nn::TapeT<double> tape;
  auto loss = build_loss(tape);
  tape.backward(loss);
  std::vector<nn::TensorPtr<double>> params{conv_w, conv_b, lstm_w,
                                            lstm_u, lstm_b, head_w, head_b};
  for (const auto& param : params) {
    std::vector<double> analytic = param->grad;
    for (std::size_t i = 0; i < param->data.size(); ++i) {
      const double fd = oracles::central_difference(
          [&] {
            nn::TapeT<double> probe(false);
            return build_loss(probe)->data[0];
          },
          param->data[i], 1e-3);
      CHECK(oracles::gradcheck_error(analytic[i], fd) < 1e-4);
    }
  }
}

TEST_CASE("model save/load round trip") {
  auto maps = labeled_cohort(8, 59);
  const auto result = cnnlstm::train_cnnlstm(refs(maps), small_cfg(61));
  const auto path =
      std::filesystem::temp_directory_path() / "cnnlstm_test.ckpt";
  cnnlstm::save_model(result.model, path);
  const auto loaded = cnnlstm::load_model(path);
  CHECK(cnnlstm::predict(loaded, maps[0]) ==
        cnnlstm::predict(result.model, maps[0]));
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
}

}  // TEST_SUITE
