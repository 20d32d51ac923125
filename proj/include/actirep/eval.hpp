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

#ifndef ACTIREP_EVAL_HPP_
#define ACTIREP_EVAL_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "actirep/actigram.hpp"
#include "actirep/cnnlstm.hpp"
#include "actirep/common.hpp"
#include "actirep/vae.hpp"

namespace actirep::eval {

struct ProtocolConfig {
  int external_repeats = 30;
  int internal_folds = 5;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

void validate(const ProtocolConfig& cfg);

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> values;  // one entry per external repeat
};

// Sample mean and standard deviation (n-1 denominator).
MetricSummary summarize(const std::vector<double>& values);

struct EvalReport {
  std::string experiment;
  std::string model_kind;
  int n_healthy = 0;
  int n_unhealthy = 0;
  MetricSummary accuracy;
  MetricSummary auc;
  MetricSummary precision;
  MetricSummary recall;
  ProtocolConfig config;
};

enum class ModelKind { VaeLr, CnnLstm, CnnLstmAug };

ModelKind model_kind_from_string(const std::string& name);
const char* model_kind_name(ModelKind kind);

// Uniform sample without replacement from the majority class so both classes
// end up with min(|healthy|, |unhealthy|) members; all minority members are
// kept. Returns the balanced id set, sorted.
std::vector<std::string> undersample(const std::vector<std::string>& healthy,
                                     const std::vector<std::string>& unhealthy,
                                     std::uint64_t seed);

struct Metrics {
  double accuracy = 0.0;
  double auc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Threshold-based confusion metrics (score >= threshold predicts positive)
// plus rank-based AUC with ties counted one-half.
Metrics compute_metrics(const std::vector<double>& scores,
                        const std::vector<int>& binary_labels,
                        double threshold = 0.5);

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
};

// Mean BCE + (l2 / 2) * ||w||^2 (bias unregularized) and its gradient;
// exposed for the finite-difference oracle.
double logistic_objective(const LogisticModel& model,
                          const std::vector<std::vector<double>>& rows,
                          const std::vector<int>& binary_labels, double l2);
void logistic_gradient(const LogisticModel& model,
                       const std::vector<std::vector<double>>& rows,
                       const std::vector<int>& binary_labels, double l2,
                       std::vector<double>& grad_w, double& grad_b);

// Full-batch gradient descent with backtracking line search from zero init,
// run until the gradient infinity-norm drops below 1e-6 or 1e4 iterations.
LogisticModel fit_logistic(const std::vector<std::vector<double>>& rows,
                           const std::vector<int>& binary_labels,
                           double l2 = 1e-4);

double logistic_score(const LogisticModel& model,
                      const std::vector<double>& row);

// One evaluation participant. Deep kinds read `map`; vae_lr reads the raw
// feature vector (standardization happens per split inside the harness).
struct Participant {
  std::string id;
  BinaryClass label = BinaryClass::Healthy;
  std::vector<double> features;
  const actigram::ActigraphyMap* map = nullptr;
};

struct Dataset {
  std::vector<Participant> participants;
  std::vector<const vae::LabeledMap*> synthetic;  // joins training sets only
};

// Throws if train/test overlap or any synthetic id reaches the test side.
void check_split(const std::vector<std::string>& train_ids,
                 const std::vector<std::string>& test_ids,
                 const std::vector<const vae::LabeledMap*>& synthetic);

// The full protocol: per repeat, undersample the majority class with a
// repeat-derived seed, stratified train/test split, model fit (deep kinds
// select their epoch count by internal k-fold cross-validation on the
// training split, then retrain on all of it), metrics on the test split.
EvalReport run_experiment(ModelKind kind, const std::string& experiment_id,
                          const Dataset& data, const ProtocolConfig& cfg,
                          const cnnlstm::CnnLstmConfig& deep_cfg = {});

// JSON document with per-repeat metric arrays and the resolved config.
std::string report_to_json(const EvalReport& report);

// Plain-text table, one row per report.
std::string format_report_table(const std::vector<EvalReport>& reports);

void write_report(const EvalReport& report, const std::filesystem::path& path);

}  // namespace actirep::eval

#endif  // ACTIREP_EVAL_HPP_
