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

#ifndef ACTIREP_SIMULATE_HPP_
#define ACTIREP_SIMULATE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "actirep/common.hpp"
#include "actirep/ingest.hpp"

namespace actirep::sim {

// Class effects applied to unhealthy participants: a reduced circadian
// envelope amplitude, a delayed activity phase, and extra sleep-period
// bursts.
struct EffectSpec {
  double amplitude_drop = 0.35;      // in [0, 1]
  double phase_shift_hours = 2.0;
  double fragmentation_boost = 1.0;  // >= 0
};

struct CohortSpec {
  int n_participants = 10;
  int days = 28;
  double unhealthy_fraction = 0.5;
  EffectSpec effect;
  double missing_rate = 0.0;  // in [0, 1)
  std::uint64_t seed = 0;
};

void validate(const CohortSpec& spec);

struct ManifestEntry {
  std::string id;
  BinaryClass label = BinaryClass::Healthy;
  std::string raw_csv;  // file name relative to the output directory
};

struct Manifest {
  std::vector<ManifestEntry> participants;
  std::string survey_csv;
};

// One participant's ground truth plus the Z-axis stream at 30 Hz; the
// in-memory form consumed by the fused pipeline. Timestamps carry the
// missing-segment gaps.
struct SimulatedParticipant {
  std::string id;
  BinaryClass label = BinaryClass::Healthy;
  std::vector<std::int64_t> timestamps_ms;
  std::vector<double> z;
  ingest::SurveyRecord survey;
};

// Deterministic per (spec, index); the Z stream is identical whether the
// participant is materialized to CSV or consumed in memory.
SimulatedParticipant simulate_participant(const CohortSpec& spec, int index);

// Writes one raw CSV per participant, the cohort survey CSV, and a JSON
// manifest (participant id -> {label, files}).
Manifest generate_cohort(const CohortSpec& spec,
                         const std::filesystem::path& out_dir);

Manifest read_manifest(const std::filesystem::path& path);

}  // namespace actirep::sim

#endif  // ACTIREP_SIMULATE_HPP_
