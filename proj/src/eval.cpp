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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "actirep/labels.hpp"
#include "actirep/rng.hpp"
#include "json.hpp"

namespace actirep::eval {

namespace {

double stable_softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

void validate(const ProtocolConfig& cfg) {
  require(cfg.external_repeats >= 1 && cfg.internal_folds >= 2 &&
              cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0,
          ErrorCode::UsageError, "invalid protocol config");
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary summary;
  summary.values = values;
  if (values.empty()) return summary;
  double acc = 0.0;
  for (double v : values) acc += v;
  summary.mean = acc / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) {
      const double centered = v - summary.mean;
      ss += centered * centered;
    }
    summary.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return summary;
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "vae_lr") return ModelKind::VaeLr;
  if (name == "cnnlstm") return ModelKind::CnnLstm;
  if (name == "cnnlstm_aug") return ModelKind::CnnLstmAug;
  throw Error(ErrorCode::UsageError, "unknown model kind " + name);
}

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::VaeLr: return "vae_lr";
    case ModelKind::CnnLstm: return "cnnlstm";
    case ModelKind::CnnLstmAug: return "cnnlstm_aug";
  }
  return "?";
}

std::vector<std::string> undersample(const std::vector<std::string>& healthy,
                                     const std::vector<std::string>& unhealthy,
                                     std::uint64_t seed) {
  require(!healthy.empty() && !unhealthy.empty(), ErrorCode::EmptyClass,
          "undersample needs members in both classes");
  const std::vector<std::string>* majority = &healthy;
  const std::vector<std::string>* minority = &unhealthy;
  if (majority->size() < minority->size()) std::swap(majority, minority);

  std::vector<std::string> pool(*majority);
  std::sort(pool.begin(), pool.end());
  Rng rng(seed);
  // Partial Fisher-Yates: the first `target` slots become the sample.
  const std::size_t target = minority->size();
  for (std::size_t i = 0; i < target; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<std::string> balanced(pool.begin(),
                                    pool.begin() + static_cast<long>(target));
  balanced.insert(balanced.end(), minority->begin(), minority->end());
  std::sort(balanced.begin(), balanced.end());
  return balanced;
}

Metrics compute_metrics(const std::vector<double>& scores,
                        const std::vector<int>& binary_labels,
                        double threshold) {
  require(scores.size() == binary_labels.size(), ErrorCode::LengthMismatch,
          "scores and labels differ in length");
  require(!scores.empty(), ErrorCode::LengthMismatch, "empty metric input");
  std::size_t positives = 0;
  for (int label : binary_labels) positives += label != 0 ? 1u : 0u;
  const std::size_t negatives = scores.size() - positives;
  require(positives > 0 && negatives > 0, ErrorCode::SingleClassAUC,
          "AUC needs both classes present");

  Metrics metrics;

  // Confusion counts at the threshold.
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = binary_labels[i] != 0;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  metrics.accuracy =
      static_cast<double>(tp + tn) / static_cast<double>(scores.size());
  metrics.precision =
      tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                  : 0.0;
  metrics.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);

  // Rank-based AUC; tie groups get mid-ranks, which counts ties one-half.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) {
      ++j;
    }
    const double mid_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (binary_labels[order[k]] != 0) positive_rank_sum += mid_rank;
    }
    i = j + 1;
  }
  const double u = positive_rank_sum -
                   0.5 * static_cast<double>(positives) *
                       static_cast<double>(positives + 1);
  metrics.auc =
      u / (static_cast<double>(positives) * static_cast<double>(negatives));
  return metrics;
}

double logistic_objective(const LogisticModel& model,
                          const std::vector<std::vector<double>>& rows,
                          const std::vector<int>& binary_labels, double l2) {
  double loss = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double logit = model.bias;
    for (std::size_t d = 0; d < rows[i].size(); ++d) {
      logit += model.weights[d] * rows[i][d];
    }
    // softplus(-l) for positives, softplus(l) for negatives: bitwise
    // symmetric under (w, b, y) -> (-w, -b, 1-y).
    loss += binary_labels[i] != 0 ? stable_softplus(-logit)
                                  : stable_softplus(logit);
  }
  loss /= static_cast<double>(rows.size());
  double penalty = 0.0;
  for (double w : model.weights) penalty += w * w;
  return loss + 0.5 * l2 * penalty;
}

void logistic_gradient(const LogisticModel& model,
                       const std::vector<std::vector<double>>& rows,
                       const std::vector<int>& binary_labels, double l2,
                       std::vector<double>& grad_w, double& grad_b) {
  grad_w.assign(model.weights.size(), 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double logit = model.bias;
    for (std::size_t d = 0; d < rows[i].size(); ++d) {
      logit += model.weights[d] * rows[i][d];
    }
    // dL/dlogit = sigmoid(l) - y, written so the mirrored problem produces
    // the exactly negated value.
    const double dlogit = binary_labels[i] != 0 ? -stable_sigmoid(-logit)
                                                : stable_sigmoid(logit);
    for (std::size_t d = 0; d < rows[i].size(); ++d) {
      grad_w[d] += dlogit * rows[i][d];
    }
    grad_b += dlogit;
  }
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (std::size_t d = 0; d < grad_w.size(); ++d) {
    grad_w[d] = grad_w[d] * inv_n + l2 * model.weights[d];
  }
  grad_b *= inv_n;
}

LogisticModel fit_logistic(const std::vector<std::vector<double>>& rows,
                           const std::vector<int>& binary_labels,
                           double l2) {
  require(rows.size() == binary_labels.size() && !rows.empty(),
          ErrorCode::LengthMismatch, "rows and labels differ in length");
  bool has_positive = false;
  bool has_negative = false;
  for (int label : binary_labels) (label != 0 ? has_positive : has_negative) = true;
  require(has_positive && has_negative, ErrorCode::SingleClassData,
          "logistic regression needs both classes");
  for (const auto& row : rows) {
    require(row.size() == rows.front().size(), ErrorCode::LengthMismatch,
            "feature rows differ in length");
    for (double v : row) {
      require(std::isfinite(v), ErrorCode::NonFinite,
              "non-finite feature value");
    }
  }

  LogisticModel model;
  model.weights.assign(rows.front().size(), 0.0);
  model.bias = 0.0;

  std::vector<double> grad_w;
  double grad_b = 0.0;
  double step = 1.0;
  double objective = logistic_objective(model, rows, binary_labels, l2);
  constexpr int kMaxIterations = 10000;
  constexpr double kTolerance = 1e-6;
  for (int iteration = 0; iteration < kMaxIterations; ++iteration) {
    logistic_gradient(model, rows, binary_labels, l2, grad_w, grad_b);
    double grad_norm = std::abs(grad_b);
    double grad_sq = grad_b * grad_b;
    for (double g : grad_w) {
      grad_norm = std::max(grad_norm, std::abs(g));
      grad_sq += g * g;
    }
    if (grad_norm < kTolerance) break;

    // Backtracking (Armijo) line search.
    step = std::min(step * 2.0, 1e4);
    LogisticModel trial = model;
    double trial_objective = objective;
    for (int halving = 0; halving < 60; ++halving) {
      for (std::size_t d = 0; d < model.weights.size(); ++d) {
        trial.weights[d] = model.weights[d] - step * grad_w[d];
      }
      trial.bias = model.bias - step * grad_b;
      trial_objective = logistic_objective(trial, rows, binary_labels, l2);
      if (trial_objective <= objective - 0.5 * step * grad_sq) break;
      step *= 0.5;
    }
    model = trial;
    objective = trial_objective;
  }
  return model;
}

double logistic_score(const LogisticModel& model,
                      const std::vector<double>& row) {
  require(row.size() == model.weights.size(), ErrorCode::LengthMismatch,
          "feature row does not match the model");
  double logit = model.bias;
  for (std::size_t d = 0; d < row.size(); ++d) {
    logit += model.weights[d] * row[d];
  }
  return stable_sigmoid(logit);
}

void check_split(const std::vector<std::string>& train_ids,
                 const std::vector<std::string>& test_ids,
                 const std::vector<const vae::LabeledMap*>& synthetic) {
  std::set<std::string> test_set(test_ids.begin(), test_ids.end());
  for (const std::string& id : train_ids) {
    require(test_set.count(id) == 0, ErrorCode::UsageError,
            "participant " + id + " appears in train and test");
  }
  for (const vae::LabeledMap* labeled : synthetic) {
    require(test_set.count(labeled->map.participant_id) == 0,
            ErrorCode::UsageError,
            "synthetic map " + labeled->map.participant_id +
                " leaked into a test fold");
  }
}

namespace {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Stratified shuffle-split over the balanced participant indices.
SplitIndices stratified_split(const Dataset& data,
                              const std::vector<std::size_t>& selected,
                              double test_fraction, std::uint64_t seed) {
  SplitIndices split;
  for (BinaryClass label : {BinaryClass::Healthy, BinaryClass::Unhealthy}) {
    std::vector<std::size_t> members;
    for (std::size_t index : selected) {
      if (data.participants[index].label == label) members.push_back(index);
    }
    Rng rng(derive_seed(seed, std::string("split.") + binary_class_name(label)));
    rng.shuffle(members);
    const std::size_t n_test = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::lround(test_fraction * static_cast<double>(members.size()))));
    require(n_test < members.size(), ErrorCode::InsufficientData,
            "class too small for the requested test fraction");
    split.test.insert(split.test.end(), members.begin(),
                      members.begin() + static_cast<long>(n_test));
    split.train.insert(split.train.end(),
                       members.begin() + static_cast<long>(n_test),
                       members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

// Mean validation BCE per epoch across stratified internal folds, used to
// pick the epoch count before the final retrain.
int select_epochs_by_internal_cv(
    const Dataset& data, const std::vector<std::size_t>& train_indices,
    bool augmented, const cnnlstm::CnnLstmConfig& deep_cfg, int folds,
    std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> fold_members(
      static_cast<std::size_t>(folds));
  for (BinaryClass label : {BinaryClass::Healthy, BinaryClass::Unhealthy}) {
    std::vector<std::size_t> members;
    for (std::size_t index : train_indices) {
      if (data.participants[index].label == label) members.push_back(index);
    }
    Rng rng(derive_seed(seed, std::string("cv.") + binary_class_name(label)));
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      fold_members[i % static_cast<std::size_t>(folds)].push_back(members[i]);
    }
  }

  std::vector<double> mean_validation_bce(
      static_cast<std::size_t>(deep_cfg.epochs), 0.0);
  int usable_folds = 0;
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<cnnlstm::LabeledMapRef> fold_train;
    std::vector<cnnlstm::LabeledMapRef> fold_validation;
    for (int other = 0; other < folds; ++other) {
      for (std::size_t index : fold_members[static_cast<std::size_t>(other)]) {
        const Participant& participant = data.participants[index];
        auto& bucket = other == fold ? fold_validation : fold_train;
        bucket.emplace_back(participant.map, participant.label);
      }
    }
    if (fold_validation.empty()) continue;
    bool train_healthy = false;
    bool train_unhealthy = false;
    for (const auto& [map, label] : fold_train) {
      (label == BinaryClass::Healthy ? train_healthy : train_unhealthy) = true;
    }
    if (!train_healthy || !train_unhealthy) continue;

    cnnlstm::CnnLstmConfig fold_cfg = deep_cfg;
    fold_cfg.seed = derive_seed(seed, "cv.fold", static_cast<std::uint64_t>(fold));
    cnnlstm::TrainResult result;
    if (augmented) {
      result = cnnlstm::train_with_augmentation(fold_train, data.synthetic,
                                                fold_cfg, fold_validation);
    } else {
      result = cnnlstm::train_cnnlstm(fold_train, fold_cfg, fold_validation);
    }
    for (std::size_t e = 0; e < result.epoch_validation_bce.size(); ++e) {
      mean_validation_bce[e] += result.epoch_validation_bce[e];
    }
    ++usable_folds;
  }
  if (usable_folds == 0) return deep_cfg.epochs;
  int best_epoch = 0;
  for (std::size_t e = 1; e < mean_validation_bce.size(); ++e) {
    if (mean_validation_bce[e] < mean_validation_bce[static_cast<std::size_t>(
            best_epoch)]) {
      best_epoch = static_cast<int>(e);
    }
  }
  return best_epoch + 1;
}

}  // namespace

EvalReport run_experiment(ModelKind kind, const std::string& experiment_id,
                          const Dataset& data, const ProtocolConfig& cfg,
                          const cnnlstm::CnnLstmConfig& deep_cfg) {
  validate(cfg);
  EvalReport report;
  report.experiment = experiment_id;
  report.model_kind = model_kind_name(kind);
  report.config = cfg;

  std::vector<std::string> healthy_ids;
  std::vector<std::string> unhealthy_ids;
  for (const Participant& participant : data.participants) {
    (participant.label == BinaryClass::Healthy ? healthy_ids : unhealthy_ids)
        .push_back(participant.id);
  }
  report.n_healthy = static_cast<int>(healthy_ids.size());
  report.n_unhealthy = static_cast<int>(unhealthy_ids.size());
  require(!healthy_ids.empty() && !unhealthy_ids.empty(),
          ErrorCode::InsufficientData, "both classes must be present");

  std::vector<double> accuracy_values, auc_values, precision_values,
      recall_values;

  for (int repeat = 0; repeat < cfg.external_repeats; ++repeat) {
    const std::uint64_t repeat_seed =
        derive_seed(cfg.seed, "eval.repeat", static_cast<std::uint64_t>(repeat));

    const std::vector<std::string> balanced_ids = undersample(
        healthy_ids, unhealthy_ids, derive_seed(repeat_seed, "undersample"));
    std::set<std::string> balanced(balanced_ids.begin(), balanced_ids.end());
    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < data.participants.size(); ++i) {
      if (balanced.count(data.participants[i].id) > 0) selected.push_back(i);
    }

    const SplitIndices split =
        stratified_split(data, selected, cfg.test_fraction, repeat_seed);

    std::vector<std::string> train_ids, test_ids;
    for (std::size_t index : split.train) {
      train_ids.push_back(data.participants[index].id);
    }
    for (std::size_t index : split.test) {
      test_ids.push_back(data.participants[index].id);
    }
    check_split(train_ids, test_ids, data.synthetic);

    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t index : split.test) {
      labels.push_back(
          data.participants[index].label == BinaryClass::Unhealthy ? 1 : 0);
    }

    if (kind == ModelKind::VaeLr) {
      std::vector<std::vector<double>> train_rows;
      std::vector<int> train_labels;
      for (std::size_t index : split.train) {
        train_rows.push_back(data.participants[index].features);
        train_labels.push_back(
            data.participants[index].label == BinaryClass::Unhealthy ? 1 : 0);
      }
      const labels::Standardizer standardizer =
          labels::Standardizer::fit(train_rows);
      for (auto& row : train_rows) row = standardizer.transform(row);
      const LogisticModel model = fit_logistic(train_rows, train_labels);
      for (std::size_t index : split.test) {
        scores.push_back(logistic_score(
            model,
            standardizer.transform(data.participants[index].features)));
      }
    } else {
      const bool augmented = kind == ModelKind::CnnLstmAug;
      std::vector<cnnlstm::LabeledMapRef> train_examples;
      for (std::size_t index : split.train) {
        const Participant& participant = data.participants[index];
        require(participant.map != nullptr, ErrorCode::InsufficientData,
                "deep model kinds need maps");
        train_examples.emplace_back(participant.map, participant.label);
      }
      const int best_epochs = select_epochs_by_internal_cv(
          data, split.train, augmented, deep_cfg, cfg.internal_folds,
          repeat_seed);
      cnnlstm::CnnLstmConfig final_cfg = deep_cfg;
      final_cfg.seed = derive_seed(repeat_seed, "final");
      cnnlstm::TrainResult result;
      if (augmented) {
        result = cnnlstm::train_with_augmentation(
            train_examples, data.synthetic, final_cfg, {}, best_epochs);
      } else {
        result = cnnlstm::train_cnnlstm(train_examples, final_cfg, {},
                                        best_epochs);
      }
      for (std::size_t index : split.test) {
        scores.push_back(
            cnnlstm::predict(result.model, *data.participants[index].map));
      }
    }

    const Metrics metrics = compute_metrics(scores, labels);
    accuracy_values.push_back(metrics.accuracy);
    auc_values.push_back(metrics.auc);
    precision_values.push_back(metrics.precision);
    recall_values.push_back(metrics.recall);
  }

  report.accuracy = summarize(accuracy_values);
  report.auc = summarize(auc_values);
  report.precision = summarize(precision_values);
  report.recall = summarize(recall_values);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json doc;
  doc["experiment"] = report.experiment;
  doc["model"] = report.model_kind;
  doc["n_healthy"] = report.n_healthy;
  doc["n_unhealthy"] = report.n_unhealthy;
  doc["config"] = {{"external_repeats", report.config.external_repeats},
                   {"internal_folds", report.config.internal_folds},
                   {"test_fraction", report.config.test_fraction},
                   {"seed", report.config.seed}};
  auto metric = [](const MetricSummary& summary) {
    return nlohmann::ordered_json{{"mean", summary.mean},
                                  {"std", summary.stddev},
                                  {"values", summary.values}};
  };
  doc["metrics"] = {{"accuracy", metric(report.accuracy)},
                    {"auc", metric(report.auc)},
                    {"precision", metric(report.precision)},
                    {"recall", metric(report.recall)}};
  return doc.dump(2);
}

std::string format_report_table(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "Outcome  Model        Num. healthy/unhealthy  Acc.        AUC         "
         "Precision   Recall\n";
  char buffer[256];
  for (const EvalReport& report : reports) {
    std::snprintf(buffer, sizeof(buffer),
                  "%-8s %-12s %9d/%-12d %.2f(%.2f)  %.2f(%.2f)  %.2f(%.2f)  "
                  "%.2f(%.2f)\n",
                  report.experiment.c_str(), report.model_kind.c_str(),
                  report.n_healthy, report.n_unhealthy, report.accuracy.mean,
                  report.accuracy.stddev, report.auc.mean, report.auc.stddev,
                  report.precision.mean, report.precision.stddev,
                  report.recall.mean, report.recall.stddev);
    out << buffer;
  }
  return out.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot open " + path.string());
  out << report_to_json(report) << "\n";
  require(out.good(), ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace actirep::eval
