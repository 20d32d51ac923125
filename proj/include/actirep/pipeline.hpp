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

#ifndef ACTIREP_PIPELINE_HPP_
#define ACTIREP_PIPELINE_HPP_

#include <filesystem>
#include <vector>

#include "actirep/actigram.hpp"
#include "actirep/eval.hpp"
#include "actirep/ingest.hpp"
#include "actirep/labels.hpp"
#include "actirep/signal.hpp"
#include "actirep/simulate.hpp"
#include "actirep/vae.hpp"

namespace actirep::pipeline {

struct PreparedCohort {
  std::vector<actigram::ActigraphyMap> maps;  // admitted participants only
  std::vector<BinaryClass> truth_labels;      // aligned with maps
  std::vector<ingest::SurveyRecord> surveys;  // aligned with maps
  double normalization_cap = 0.0;
  int excluded = 0;
};

// Fused simulate -> bandpass -> epoch counts -> cap fit -> maps, entirely in
// memory. Raw streams at 30 Hz are too large to materialize for cohort-scale
// runs; the Z stream here is bitwise identical to what generate_cohort
// writes, and the write/parse round trip is covered by its own tests.
// `jobs` caps the per-participant workers (0 picks a small default).
PreparedCohort prepare_simulated_cohort(const sim::CohortSpec& spec,
                                        const actigram::MapConfig& map_cfg,
                                        const signal::FilterSpec& filter = {},
                                        int jobs = 0);

struct PrepSummary {
  int written = 0;
  int excluded = 0;
  double normalization_cap = 0.0;
};

// File-based prep stage: every *.csv under raw_dir (except the survey and
// manifest) is parsed, filtered, epoched and written as <id>.amap under
// out_dir. When map_cfg.normalization_cap <= 0 the cap is fitted on the
// whole input set first.
PrepSummary prep_directory(const std::filesystem::path& raw_dir,
                           const std::filesystem::path& out_dir,
                           actigram::MapConfig map_cfg,
                           const signal::FilterSpec& filter = {});

// Joins maps, latent codes and surveys into an evaluation dataset for one
// experiment. Participants must be eligible under the experiment's label
// rule; codes may be empty for deep-only runs (features stay empty then).
eval::Dataset assemble_dataset(
    const std::vector<actigram::ActigraphyMap>& maps,
    const std::vector<vae::LatentCode>& codes,
    const std::vector<ingest::SurveyRecord>& surveys,
    const labels::ExperimentSpec& spec);

// Index of the map with the median total activity; the default traversal
// base.
std::size_t median_activity_index(
    const std::vector<actigram::ActigraphyMap>& maps);

}  // namespace actirep::pipeline

#endif  // ACTIREP_PIPELINE_HPP_
