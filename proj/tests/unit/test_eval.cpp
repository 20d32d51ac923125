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

#include "actirep/eval.hpp"

#include <cmath>
#include <set>

#include "actirep/common.hpp"
#include "actirep/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace actirep;
using eval::Dataset;
using eval::ModelKind;
using eval::Participant;
using eval::ProtocolConfig;

namespace {

std::vector<std::string> make_ids(const std::string& prefix, int n) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

// Linearly separable-ish features: class means +-delta on the first axis.
Dataset feature_dataset(int per_class, double delta, std::uint64_t seed) {
  Rng rng(seed);
  Dataset dataset;
  for (int i = 0; i < 2 * per_class; ++i) {
    Participant participant;
    const bool unhealthy = i < per_class;
    participant.id = (unhealthy ? "u" : "h") + std::to_string(i);
    participant.label =
        unhealthy ? BinaryClass::Unhealthy : BinaryClass::Healthy;
    participant.features = {rng.normal() + (unhealthy ? delta : -delta),
                            rng.normal(), rng.normal()};
    dataset.participants.push_back(std::move(participant));
  }
  return dataset;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("undersample balances 494/111 to 111/111") {
  const auto healthy = make_ids("h", 494);
  const auto unhealthy = make_ids("u", 111);
  const auto balanced = eval::undersample(healthy, unhealthy, 31);
  CHECK(balanced.size() == 222);
  int kept_healthy = 0;
  int kept_unhealthy = 0;
  std::set<std::string> unique(balanced.begin(), balanced.end());
  CHECK(unique.size() == balanced.size());
  for (const auto& id : balanced) {
    (id[0] == 'h' ? kept_healthy : kept_unhealthy) += 1;
  }
  CHECK(kept_healthy == 111);
  CHECK(kept_unhealthy == 111);
}

TEST_CASE("undersample keeps balanced input and swaps roles") {
  const auto healthy = make_ids("h", 5);
  const auto unhealthy = make_ids("u", 5);
  const auto balanced = eval::undersample(healthy, unhealthy, 1);
  CHECK(balanced.size() == 10);
  const auto rebalance = eval::undersample(healthy, unhealthy, 1);
  CHECK(balanced == rebalance);  // seeded determinism

  // Roles swap when the "unhealthy" set is the larger one.
  const auto swapped = eval::undersample(make_ids("h", 3), make_ids("u", 9), 2);
  CHECK(swapped.size() == 6);

  CHECK_THROWS_AS(eval::undersample({}, unhealthy, 3), Error);
}

TEST_CASE("distinct seeds draw distinct majority subsets") {
  const auto healthy = make_ids("h", 494);
  const auto unhealthy = make_ids("u", 111);
  std::set<std::vector<std::string>> subsets;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto balanced = eval::undersample(healthy, unhealthy, seed);
    CHECK(balanced.size() == 222);
    subsets.insert(std::move(balanced));
  }
  CHECK(subsets.size() == 30);
}

TEST_CASE("metrics on perfect separation") {
  const auto metrics = eval::compute_metrics({0.9, 0.8, 0.1, 0.2},
                                             {1, 1, 0, 0});
  CHECK(metrics.auc == 1.0);
  CHECK(metrics.accuracy == 1.0);
  CHECK(metrics.precision == 1.0);
  CHECK(metrics.recall == 1.0);
}

TEST_CASE("all-equal scores give AUC one half") {
  const auto metrics =
      eval::compute_metrics({0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0});
  CHECK(metrics.auc == 0.5);
}

TEST_CASE("metric errors") {
  CHECK_THROWS_AS(eval::compute_metrics({0.5}, {1, 0}), Error);
  CHECK_THROWS_AS(eval::compute_metrics({0.5, 0.6}, {1, 1}), Error);
}

TEST_CASE("AUC equals the pairwise oracle") {
  Rng rng(83);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> scores(200);
    std::vector<int> labels(200);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      // Quantized scores force tie groups.
      scores[i] = std::round(rng.uniform01() * 50.0) / 50.0;
      labels[i] = rng.uniform01() < 0.4 ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    const auto metrics = eval::compute_metrics(scores, labels);
    const double oracle = oracles::auc_pairwise(scores, labels);
    CHECK(std::abs(metrics.auc - oracle) < 1e-12);
  }
}

TEST_CASE("AUC is invariant under strictly monotone transforms") {
  Rng rng(89);
  std::vector<double> scores(150);
  std::vector<int> labels(150);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = std::round(rng.uniform01() * 30.0) / 30.0;
    labels[i] = rng.uniform01() < 0.5 ? 1 : 0;
  }
  labels[0] = 1;
  labels[1] = 0;
  std::vector<double> transformed(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    transformed[i] = 2.0 * scores[i] + 1.0;
  }
  CHECK(eval::compute_metrics(scores, labels).auc ==
        eval::compute_metrics(transformed, labels).auc);
}

TEST_CASE("logistic regression separates a toy problem") {
  Rng rng(97);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    const bool positive = i % 2 == 0;
    rows.push_back({(positive ? 1.0 : -1.0) + 0.1 * rng.normal(),
                    0.1 * rng.normal()});
    labels.push_back(positive ? 1 : 0);
  }
  const auto model = eval::fit_logistic(rows, labels);
  int correct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double p = eval::logistic_score(model, rows[i]);
    correct += (p >= 0.5) == (labels[i] == 1) ? 1 : 0;
  }
  CHECK(correct == 40);
}

TEST_CASE("flipping labels exactly negates the solution") {
  Rng rng(101);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<int> flipped;
  for (int i = 0; i < 30; ++i) {
    rows.push_back({rng.normal(), rng.normal(), rng.normal()});
    labels.push_back(rng.uniform01() < 0.5 ? 1 : 0);
    flipped.push_back(1 - labels.back());
  }
  labels[0] = 1;
  labels[1] = 0;
  flipped[0] = 0;
  flipped[1] = 1;
  const auto model = eval::fit_logistic(rows, labels);
  const auto mirror = eval::fit_logistic(rows, flipped);
  for (std::size_t d = 0; d < model.weights.size(); ++d) {
    CHECK(mirror.weights[d] == -model.weights[d]);  // bitwise negation
  }
  CHECK(mirror.bias == -model.bias);
}

TEST_CASE("logistic gradient at the optimum matches finite differences") {
  Rng rng(103);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) {
    rows.push_back({rng.normal(), rng.normal()});
    labels.push_back(rng.uniform01() < 0.5 ? 1 : 0);
  }
  labels[0] = 1;
  labels[1] = 0;
  auto model = eval::fit_logistic(rows, labels);

  std::vector<double> grad_w;
  double grad_b = 0.0;
  eval::logistic_gradient(model, rows, labels, 1e-4, grad_w, grad_b);
  for (double g : grad_w) CHECK(std::abs(g) < 1e-6);

  for (std::size_t d = 0; d < model.weights.size(); ++d) {
    const double fd = oracles::central_difference(
        [&] { return eval::logistic_objective(model, rows, labels, 1e-4); },
        model.weights[d], 1e-4);
    CHECK(std::abs(fd - grad_w[d]) / std::max({1.0, std::abs(fd)}) < 1e-5);
  }
  const double fd_b = oracles::central_difference(
      [&] { return eval::logistic_objective(model, rows, labels, 1e-4); },
      model.bias, 1e-4);
  CHECK(std::abs(fd_b - grad_b) / std::max({1.0, std::abs(fd_b)}) < 1e-5);

  // Away from the optimum the gradient must still match.
  model.weights[0] += 0.37;
  model.bias -= 0.21;
  eval::logistic_gradient(model, rows, labels, 1e-4, grad_w, grad_b);
  for (std::size_t d = 0; d < model.weights.size(); ++d) {
    const double fd = oracles::central_difference(
        [&] { return eval::logistic_objective(model, rows, labels, 1e-4); },
        model.weights[d], 1e-4);
    CHECK(oracles::gradcheck_error(grad_w[d], fd) < 1e-5);
  }
}

TEST_CASE("logistic input validation") {
  CHECK_THROWS_AS(eval::fit_logistic({{1.0}, {2.0}}, {1, 1}), Error);
  CHECK_THROWS_AS(
      eval::fit_logistic({{std::nan("")}, {1.0}}, {1, 0}), Error);
}

TEST_CASE("aggregation matches the sample-statistics oracle") {
  Rng rng(107);
  std::vector<double> values(30);
  for (double& v : values) v = rng.uniform01();
  const auto summary = eval::summarize(values);
  double mean = 0.0, stddev = 0.0;
  oracles::mean_std(values, mean, stddev);
  CHECK(std::abs(summary.mean - mean) < 1e-12);
  CHECK(std::abs(summary.stddev - stddev) < 1e-12);
}

TEST_CASE("leakage guard") {
  std::vector<vae::LabeledMap> synthetic(1);
  synthetic[0].map.participant_id = "synth_0";
  std::vector<const vae::LabeledMap*> ptrs{&synthetic[0]};
  CHECK_NOTHROW(eval::check_split({"a", "b"}, {"c"}, ptrs));
  CHECK_THROWS_AS(eval::check_split({"a"}, {"a"}, ptrs), Error);
  CHECK_THROWS_AS(eval::check_split({"a"}, {"synth_0"}, ptrs), Error);
}

TEST_CASE("vae_lr experiment is deterministic and well shaped") {
  const Dataset dataset = feature_dataset(40, 1.5, 109);
  ProtocolConfig cfg;
  cfg.external_repeats = 30;
  cfg.seed = 3;
  const auto report =
      eval::run_experiment(ModelKind::VaeLr, "E3", dataset, cfg);
  CHECK(report.n_healthy == 40);
  CHECK(report.n_unhealthy == 40);
  CHECK(report.accuracy.values.size() == 30);
  CHECK(report.auc.values.size() == 30);
  CHECK(report.precision.values.size() == 30);
  CHECK(report.recall.values.size() == 30);
  CHECK(report.auc.mean > 0.8);  // strong separation by construction

  const auto again =
      eval::run_experiment(ModelKind::VaeLr, "E3", dataset, cfg);
  CHECK(eval::report_to_json(report) == eval::report_to_json(again));

  double mean = 0.0, stddev = 0.0;
  oracles::mean_std(report.auc.values, mean, stddev);
  CHECK(std::abs(report.auc.mean - mean) < 1e-12);
  CHECK(std::abs(report.auc.stddev - stddev) < 1e-12);
}

TEST_CASE("shuffled labels land near chance") {
  Dataset dataset = feature_dataset(150, 1.5, 113);
  Rng rng(127);
  std::vector<BinaryClass> labels;
  for (const auto& participant : dataset.participants) {
    labels.push_back(participant.label);
  }
  rng.shuffle(labels);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    dataset.participants[i].label = labels[i];
  }
  ProtocolConfig cfg;
  cfg.external_repeats = 30;
  cfg.seed = 5;
  const auto report =
      eval::run_experiment(ModelKind::VaeLr, "E3", dataset, cfg);
  CHECK(report.auc.mean > 0.4);
  CHECK(report.auc.mean < 0.6);
}

TEST_CASE("report json carries per-repeat arrays") {
  const Dataset dataset = feature_dataset(20, 1.0, 131);
  ProtocolConfig cfg;
  cfg.external_repeats = 4;
  cfg.seed = 9;
  const auto report =
      eval::run_experiment(ModelKind::VaeLr, "E1", dataset, cfg);
  const std::string json = eval::report_to_json(report);
  CHECK(json.find("\"experiment\": \"E1\"") != std::string::npos);
  CHECK(json.find("\"values\"") != std::string::npos);
  const std::string table = eval::format_report_table({report});
  CHECK(table.find("E1") != std::string::npos);
  CHECK(table.find("vae_lr") != std::string::npos);
}

}  // TEST_SUITE
