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

#ifndef ACTIREP_LABELS_HPP_
#define ACTIREP_LABELS_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "actirep/common.hpp"
#include "actirep/ingest.hpp"
#include "actirep/vae.hpp"

namespace actirep::labels {

enum class ExperimentId { E1, E2, E3, E4 };

ExperimentId experiment_from_string(const std::string& name);
const char* experiment_name(ExperimentId id);

// E1 uses PCL-5 alone; E2 adds PanicSleep; E3 and E4 use all three surveys;
// only E4 adds the SF-12 pre-health feature.
struct ExperimentSpec {
  ExperimentId id = ExperimentId::E1;
  bool use_pcl5 = true;
  bool use_panic_sleep = false;
  bool use_prom_dep8b = false;
  bool use_sf12_feature = false;

  static ExperimentSpec make(ExperimentId id);
};

enum class Outcome { Healthy, Unhealthy, Ineligible };

const char* outcome_name(Outcome outcome);

// Per-survey positivity; absent surveys propagate as absent flags.
// ptsd: pcl5 > 28; depression: prom_dep8b >= 60; panic: item >= 1.
struct SurveyFlags {
  std::optional<bool> ptsd;
  std::optional<bool> depression;
  std::optional<bool> panic_sleep;
};

SurveyFlags score_surveys(const ingest::SurveyRecord& record);

// Unhealthy: every used survey positive. Healthy: every used survey
// negative. Mixed patterns and missing required values are ineligible; E4
// additionally requires SF-12.
Outcome assign_label(const ingest::SurveyRecord& record,
                     const ExperimentSpec& spec);

// Per-feature mean/sd, fitted on training rows only.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(const std::vector<std::vector<double>>& rows);
  std::vector<double> transform(const std::vector<double>& row) const;
};

// z_act (the posterior mean), plus SF-12 for E4. Throws MissingSF12.
std::vector<double> raw_features(const vae::LatentCode& code,
                                 const ingest::SurveyRecord& record,
                                 const ExperimentSpec& spec);

std::vector<double> build_features(const vae::LatentCode& code,
                                   const ingest::SurveyRecord& record,
                                   const ExperimentSpec& spec,
                                   const Standardizer& standardizer);

// Labels CSV: header `participant_id,experiment,label`.
void write_labels_csv(
    const std::vector<std::pair<std::string, Outcome>>& rows,
    ExperimentId experiment, const std::filesystem::path& path);
std::vector<std::pair<std::string, Outcome>> read_labels_csv(
    const std::filesystem::path& path);

}  // namespace actirep::labels

#endif  // ACTIREP_LABELS_HPP_
