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

#include "actirep/labels.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace actirep::labels {

ExperimentId experiment_from_string(const std::string& name) {
  if (name == "E1") return ExperimentId::E1;
  if (name == "E2") return ExperimentId::E2;
  if (name == "E3") return ExperimentId::E3;
  if (name == "E4") return ExperimentId::E4;
  throw Error(ErrorCode::UsageError, "unknown experiment " + name);
}

const char* experiment_name(ExperimentId id) {
  switch (id) {
    case ExperimentId::E1: return "E1";
    case ExperimentId::E2: return "E2";
    case ExperimentId::E3: return "E3";
    case ExperimentId::E4: return "E4";
  }
  return "?";
}

ExperimentSpec ExperimentSpec::make(ExperimentId id) {
  ExperimentSpec spec;
  spec.id = id;
  spec.use_pcl5 = true;
  spec.use_panic_sleep = id != ExperimentId::E1;
  spec.use_prom_dep8b = id == ExperimentId::E3 || id == ExperimentId::E4;
  spec.use_sf12_feature = id == ExperimentId::E4;
  return spec;
}

const char* outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::Healthy: return "healthy";
    case Outcome::Unhealthy: return "unhealthy";
    case Outcome::Ineligible: return "ineligible";
  }
  return "?";
}

SurveyFlags score_surveys(const ingest::SurveyRecord& record) {
  SurveyFlags flags;
  if (record.pcl5.has_value()) flags.ptsd = *record.pcl5 > 28;
  if (record.prom_dep8b.has_value()) {
    flags.depression = *record.prom_dep8b >= 60.0;
  }
  if (record.panic_sleep_item.has_value()) {
    flags.panic_sleep = *record.panic_sleep_item >= 1;
  }
  return flags;
}

Outcome assign_label(const ingest::SurveyRecord& record,
                     const ExperimentSpec& spec) {
  const SurveyFlags flags = score_surveys(record);
  std::vector<std::optional<bool>> used;
  if (spec.use_pcl5) used.push_back(flags.ptsd);
  if (spec.use_panic_sleep) used.push_back(flags.panic_sleep);
  if (spec.use_prom_dep8b) used.push_back(flags.depression);

  bool all_positive = true;
  bool all_negative = true;
  for (const auto& flag : used) {
    if (!flag.has_value()) return Outcome::Ineligible;
    (*flag ? all_negative : all_positive) = false;
  }
  if (spec.use_sf12_feature && !record.sf12_prehealth.has_value()) {
    return Outcome::Ineligible;
  }
  if (all_positive) return Outcome::Unhealthy;
  if (all_negative) return Outcome::Healthy;
  return Outcome::Ineligible;
}

Standardizer Standardizer::fit(const std::vector<std::vector<double>>& rows) {
  require(!rows.empty(), ErrorCode::InsufficientData,
          "standardizer needs at least one row");
  const std::size_t dim = rows.front().size();
  Standardizer s;
  s.mean.assign(dim, 0.0);
  s.stddev.assign(dim, 0.0);
  for (const auto& row : rows) {
    require(row.size() == dim, ErrorCode::LengthMismatch,
            "feature rows differ in length");
    for (std::size_t d = 0; d < dim; ++d) s.mean[d] += row[d];
  }
  for (double& value : s.mean) value /= static_cast<double>(rows.size());
  for (const auto& row : rows) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double centered = row[d] - s.mean[d];
      s.stddev[d] += centered * centered;
    }
  }
  const double denom = rows.size() > 1 ? static_cast<double>(rows.size() - 1)
                                       : 1.0;
  for (double& value : s.stddev) value = std::sqrt(value / denom);
  return s;
}

std::vector<double> Standardizer::transform(
    const std::vector<double>& row) const {
  require(row.size() == mean.size(), ErrorCode::LengthMismatch,
          "feature row does not match the fitted standardizer");
  std::vector<double> out(row.size());
  for (std::size_t d = 0; d < row.size(); ++d) {
    out[d] = stddev[d] > 1e-12 ? (row[d] - mean[d]) / stddev[d] : 0.0;
  }
  return out;
}

std::vector<double> raw_features(const vae::LatentCode& code,
                                 const ingest::SurveyRecord& record,
                                 const ExperimentSpec& spec) {
  std::vector<double> features(code.mu.begin(), code.mu.end());
  if (spec.use_sf12_feature) {
    require(record.sf12_prehealth.has_value(), ErrorCode::MissingSF12,
            record.participant_id);
    features.push_back(*record.sf12_prehealth);
  }
  return features;
}

std::vector<double> build_features(const vae::LatentCode& code,
                                   const ingest::SurveyRecord& record,
                                   const ExperimentSpec& spec,
                                   const Standardizer& standardizer) {
  return standardizer.transform(raw_features(code, record, spec));
}

void write_labels_csv(
    const std::vector<std::pair<std::string, Outcome>>& rows,
    ExperimentId experiment, const std::filesystem::path& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot open " + path.string());
  out << "participant_id,experiment,label\n";
  for (const auto& [id, outcome] : rows) {
    out << id << ',' << experiment_name(experiment) << ','
        << outcome_name(outcome) << '\n';
  }
  require(out.good(), ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<std::pair<std::string, Outcome>> read_labels_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::EmptyFile,
          path.string());
  std::vector<std::pair<std::string, Outcome>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id, experiment, label;
    std::getline(row, id, ',');
    std::getline(row, experiment, ',');
    std::getline(row, label, ',');
    Outcome outcome = Outcome::Ineligible;
    if (label == "healthy") {
      outcome = Outcome::Healthy;
    } else if (label == "unhealthy") {
      outcome = Outcome::Unhealthy;
    } else {
      require(label == "ineligible", ErrorCode::MalformedRow,
              path.string() + ": bad label " + label);
    }
    rows.emplace_back(id, outcome);
  }
  return rows;
}

}  // namespace actirep::labels
