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
#include <filesystem>
#include <fstream>
#include <numeric>

#include "actirep/common.hpp"
#include "actirep/rng.hpp"
#include "doctest.h"

using namespace actirep;
using actigram::ActigraphyMap;
using vae::LatentCode;
using vae::VaeConfig;

namespace {

ActigraphyMap make_map(int days, int bins, float value,
                       const std::string& id = "m") {
  ActigraphyMap map;
  map.participant_id = id;
  map.days = days;
  map.bins_per_day = bins;
  map.values.assign(static_cast<std::size_t>(days) * bins, value);
  return map;
}

// Small structured cohort: two classes separated by intensity and phase.
std::vector<ActigraphyMap> toy_cohort(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ActigraphyMap> maps;
  for (int i = 0; i < n; ++i) {
    const bool unhealthy = i % 2 == 1;
    ActigraphyMap map = make_map(8, 16, 0.0f, "toy" + std::to_string(i));
    const double amplitude =
        (unhealthy ? 0.35 : 0.75) * std::exp(rng.normal(0.0, 0.15));
    const double phase = (unhealthy ? 3.0 : 0.0) + rng.normal(0.0, 0.4);
    for (int d = 0; d < 8; ++d) {
      for (int b = 0; b < 16; ++b) {
        const double wave =
            std::max(0.0, std::sin(2.0 * 3.14159265 * (b - phase) / 16.0));
        const double v =
            amplitude * wave + 0.05 * rng.uniform01();
        map.at(d, b) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
    maps.push_back(std::move(map));
  }
  return maps;
}

std::vector<const ActigraphyMap*> pointers(
    const std::vector<ActigraphyMap>& maps) {
  std::vector<const ActigraphyMap*> ptrs;
  for (const auto& map : maps) ptrs.push_back(&map);
  return ptrs;
}

VaeConfig small_cfg(std::uint64_t seed) {
  VaeConfig cfg;
  cfg.latent_dim = 4;
  cfg.epochs = 5;
  cfg.batch_size = 32;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE("vae") {

TEST_CASE("training reduces loss on a degenerate target") {
  std::vector<ActigraphyMap> maps;
  for (int i = 0; i < 256; ++i) {
    maps.push_back(make_map(8, 12, 0.0f, "z" + std::to_string(i)));
  }
  VaeConfig cfg;
  cfg.latent_dim = 4;
  cfg.epochs = 5;
  cfg.batch_size = 128;
  cfg.seed = 7;
  vae::TrainingLog log;
  vae::train_vae(pointers(maps), cfg, &log);
  REQUIRE(log.epoch_mean_loss.size() == 5);
  CHECK(log.epoch_mean_reconstruction.back() <
        log.epoch_mean_reconstruction.front());
  CHECK(log.epoch_mean_loss.back() < log.epoch_mean_loss.front());
}

TEST_CASE("insufficient data and heterogeneous shapes are rejected") {
  std::vector<ActigraphyMap> maps;
  maps.push_back(make_map(8, 12, 0.1f));
  CHECK_THROWS_AS(vae::train_vae(pointers(maps), small_cfg(1)), Error);

  for (int i = 0; i < 40; ++i) maps.push_back(make_map(8, 12, 0.1f));
  maps.push_back(make_map(8, 16, 0.1f));
  CHECK_THROWS_AS(vae::train_vae(pointers(maps), small_cfg(1)), Error);
}

TEST_CASE("kl closed form") {
  CHECK(vae::kl_closed_form({0.0f, 0.0f}, {0.0f, 0.0f}) == 0.0);
  // Monte Carlo oracle: E[log q(z) - log p(z)], z ~ q.
  Rng rng(17);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<float> mu(4), log_var(4);
    for (float& m : mu) m = static_cast<float>(rng.uniform(-2.0, 2.0));
    for (float& lv : log_var) lv = static_cast<float>(rng.uniform(-1.0, 1.0));
    const double closed = vae::kl_closed_form(mu, log_var);
    double estimate = 0.0;
    const int n = 200000;
    for (int s = 0; s < n; ++s) {
      double log_q = 0.0;
      double log_p = 0.0;
      for (int d = 0; d < 4; ++d) {
        const double sigma = std::exp(0.5 * log_var[d]);
        const double z = mu[d] + sigma * rng.normal();
        const double centered = (z - mu[d]) / sigma;
        log_q += -0.5 * centered * centered - std::log(sigma);
        log_p += -0.5 * z * z;
      }
      estimate += log_q - log_p;
    }
    estimate /= n;
    CHECK(estimate == doctest::Approx(closed).epsilon(0.02));
  }
}

TEST_CASE("encode is deterministic with the configured width") {
  auto maps = toy_cohort(40, 3);
  VaeConfig cfg;
  cfg.latent_dim = 8;
  cfg.epochs = 1;
  cfg.batch_size = 32;
  cfg.seed = 5;
  const auto model = vae::train_vae(pointers(maps), cfg);
  const LatentCode a = vae::encode(model, maps[0]);
  const LatentCode b = vae::encode(model, maps[0]);
  CHECK(a.mu.size() == 8);
  CHECK(a.log_var.size() == 8);
  CHECK(a.mu == b.mu);          // bitwise
  CHECK(a.log_var == b.log_var);

  const auto codes = vae::encode_all(model, pointers(maps));
  REQUIRE(codes.size() == maps.size());
  for (std::size_t i = 0; i < maps.size(); ++i) {
    CHECK(codes[i].mu == vae::encode(model, maps[i]).mu);
  }

  ActigraphyMap wrong = make_map(8, 12, 0.0f);
  CHECK_THROWS_AS(vae::encode(model, wrong), Error);
}

TEST_CASE("reparameterize") {
  LatentCode code;
  code.mu = {0.5f, -1.0f, 2.0f};
  code.log_var = {0.0f, 0.0f, 0.0f};
  CHECK(vae::reparameterize(code, {0.0f, 0.0f, 0.0f}) == code.mu);
  const auto shifted = vae::reparameterize(code, {1.0f, 0.0f, 0.0f});
  CHECK(shifted[0] == 1.5f);
  CHECK(shifted[1] == -1.0f);
  CHECK_THROWS_AS(vae::reparameterize(code, {0.0f}), Error);

  // Sampling oracle: moments of z over many draws.
  code.mu = {0.7f};
  code.log_var = {0.6f};
  Rng rng(23);
  const int n = 100000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const float z =
        vae::reparameterize(code, {static_cast<float>(rng.normal())})[0];
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double variance = sum_sq / n - mean * mean;
  const double expected_var = std::exp(0.6);
  const double se_mean = std::sqrt(expected_var / n);
  CHECK(std::abs(mean - 0.7) < 3.0 * se_mean);
  const double se_var = expected_var * std::sqrt(2.0 / n);
  CHECK(std::abs(variance - expected_var) < 3.0 * se_var);
}

TEST_CASE("decode range, shape and the zero-weight midpoint") {
  auto model = vae::create_model(small_cfg(11), 8, 12);
  Rng rng(2);
  std::vector<float> z(4);
  for (float& v : z) v = static_cast<float>(rng.normal());
  const auto values = vae::decode(model, z);
  CHECK(values.size() == 8u * 12u);
  for (float v : values) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }
  CHECK_THROWS_AS(vae::decode(model, {0.1f}), Error);

  for (auto& [name, tensor] : model.params) {
    if (name.rfind("dec.", 0) == 0) {
      std::fill(tensor->data.begin(), tensor->data.end(), 0.0f);
    }
  }
  for (float v : vae::decode(model, z)) CHECK(v == 0.5f);
}

TEST_CASE("traversal grid") {
  const auto model = vae::create_model(small_cfg(13), 8, 12);
  LatentCode base;
  base.mu = {0.0f, 0.3f, -0.2f, 0.0f};
  base.log_var.assign(4, 0.0f);

  const auto values = vae::traversal_values(-2.0f, 2.0f, 9);
  REQUIRE(values.size() == 9);
  CHECK(values.front() == -2.0f);
  CHECK(values.back() == 2.0f);
  CHECK(values[4] == 0.0f);
  for (int i = 0; i < 9; ++i) {
    CHECK(values[static_cast<std::size_t>(i)] ==
          -2.0f + 4.0f * static_cast<float>(i) / 8.0f);
  }

  const auto row = vae::traverse_row(model, base, 0, -2.0f, 2.0f, 9);
  REQUIRE(row.size() == 9);
  // The sweep passes through the base point (mu_0 == 0 == midpoint).
  CHECK(row[4] == vae::decode(model, base.mu));

  CHECK_THROWS_AS(vae::traverse_row(model, base, 4, -2.0f, 2.0f, 9), Error);
  CHECK_THROWS_AS(vae::traverse_row(model, base, -1, -2.0f, 2.0f, 9), Error);

  const auto path = std::filesystem::temp_directory_path() / "grid_test.pgm";
  vae::render_traversal_grid(model, base, -2.0f, 2.0f, 5, path);
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  int width = 0, height = 0;
  in >> magic >> width >> height;
  CHECK(magic == "P5");
  CHECK(width == 5 * 12 + 4);   // steps tiles + gutters
  CHECK(height == 4 * 8 + 3);   // latent_dim rows + gutters
  std::filesystem::remove(path);
}

TEST_CASE("class statistics") {
  LatentCode a, b;
  a.mu = {0.0f, 0.0f, 0.0f};
  a.log_var.assign(3, 0.0f);
  b.mu = {2.0f, 0.0f, 0.0f};
  b.log_var.assign(3, 0.0f);
  const auto stats = vae::fit_class_stats(
      {{a, BinaryClass::Healthy}, {b, BinaryClass::Healthy}});
  REQUIRE(stats.count(BinaryClass::Healthy) == 1);
  CHECK(stats.count(BinaryClass::Unhealthy) == 0);
  const auto& healthy = stats.at(BinaryClass::Healthy);
  CHECK(healthy.mean == std::vector<float>{1.0f, 0.0f, 0.0f});
  CHECK(healthy.variance[0] == 1.0f);
  CHECK(healthy.variance[1] == 0.0f);

  CHECK_THROWS_AS(vae::fit_class_stats({{a, BinaryClass::Unhealthy}}), Error);
}

TEST_CASE("class stats separate the toy cohort") {
  auto maps = toy_cohort(64, 21);
  VaeConfig cfg = small_cfg(29);
  cfg.epochs = 8;
  const auto model = vae::train_vae(pointers(maps), cfg);
  std::vector<std::pair<LatentCode, BinaryClass>> codes;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    codes.emplace_back(vae::encode(model, maps[i]),
                       i % 2 == 1 ? BinaryClass::Unhealthy
                                  : BinaryClass::Healthy);
  }
  const auto stats = vae::fit_class_stats(codes);
  const auto& healthy = stats.at(BinaryClass::Healthy);
  const auto& unhealthy = stats.at(BinaryClass::Unhealthy);
  bool separated = false;
  for (std::size_t d = 0; d < healthy.mean.size(); ++d) {
    const double pooled =
        std::sqrt(0.5 * (healthy.variance[d] + unhealthy.variance[d]));
    if (std::abs(healthy.mean[d] - unhealthy.mean[d]) > 0.1 * pooled) {
      separated = true;
    }
  }
  CHECK(separated);

  // Reconstruction beats the constant-0.5 predictor after training.
  double mean_bce = 0.0;
  for (const auto& map : maps) mean_bce += vae::reconstruction_bce(model, map);
  mean_bce /= static_cast<double>(maps.size());
  CHECK(mean_bce < std::log(2.0));
}

TEST_CASE("generation") {
  const auto model = vae::create_model(small_cfg(31), 8, 12);
  vae::ClassLatentStats stats;
  stats.label = BinaryClass::Unhealthy;
  stats.mean = {0.5f, -0.5f, 0.0f, 1.0f};
  stats.variance = {0.2f, 0.1f, 0.3f, 0.05f};

  const auto batch_a = vae::generate(model, stats, 100, 99);
  const auto batch_b = vae::generate(model, stats, 100, 99);
  REQUIRE(batch_a.size() == 100);
  for (std::size_t i = 0; i < batch_a.size(); ++i) {
    CHECK(batch_a[i].label == BinaryClass::Unhealthy);
    CHECK(batch_a[i].map.values == batch_b[i].map.values);  // same seed
  }

  stats.variance.assign(4, 0.0f);
  const auto degenerate = vae::generate(model, stats, 5, 1);
  const auto reference = vae::decode(model, stats.mean);
  for (const auto& labeled : degenerate) {
    CHECK(labeled.map.values == reference);
  }
}

TEST_CASE("model save/load round trip") {
  auto maps = toy_cohort(40, 41);
  const auto model = vae::train_vae(pointers(maps), small_cfg(43));
  const auto path = std::filesystem::temp_directory_path() / "vae_test.ckpt";
  vae::save_model(model, path);
  const auto loaded = vae::load_model(path);
  CHECK(loaded.days == model.days);
  CHECK(loaded.bins_per_day == model.bins_per_day);
  CHECK(loaded.cfg.latent_dim == model.cfg.latent_dim);
  const LatentCode original = vae::encode(model, maps[3]);
  const LatentCode reloaded = vae::encode(loaded, maps[3]);
  CHECK(original.mu == reloaded.mu);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
}

TEST_CASE("latent csv round trip") {
  std::vector<std::string> ids{"a", "b"};
  std::vector<LatentCode> codes(2);
  codes[0].mu = {1.0f, 2.0f};
  codes[0].log_var = {-0.5f, 0.25f};
  codes[1].mu = {0.0f, -3.0f};
  codes[1].log_var = {0.0f, 1.0f};
  const auto path = std::filesystem::temp_directory_path() / "latents_test.csv";
  vae::write_latent_csv(ids, codes, path);
  const auto rows = vae::read_latent_csv(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].first == "a");
  CHECK(rows[0].second.mu == codes[0].mu);
  CHECK(rows[1].second.log_var == codes[1].log_var);
  std::filesystem::remove(path);
}

}  // TEST_SUITE
