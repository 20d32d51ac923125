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

#ifndef ACTIREP_INGEST_HPP_
#define ACTIREP_INGEST_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace actirep::ingest {

struct RawSample {
  std::int64_t timestamp_ms = 0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const RawSample&) const = default;
};

struct RawRecording {
  std::string participant_id;
  std::vector<RawSample> samples;
  double nominal_rate_hz = 30.0;

  bool operator==(const RawRecording&) const = default;
};

struct SurveyRecord {
  std::string participant_id;
  std::optional<int> pcl5;               // 0..80
  std::optional<double> prom_dep8b;      // T-score
  std::optional<int> panic_sleep_item;   // 0..3
  std::optional<double> sf12_prehealth;  // normative score
};

// Raw CSV: header `timestamp_ms,x,y,z`, one sample per line. The participant
// id is taken from the file stem. Timestamps must be strictly increasing and
// all values finite.
RawRecording parse_raw_csv(const std::filesystem::path& path);

// Shortest-round-trip formatting; parse_raw_csv(write_raw_csv(r)) == r.
void write_raw_csv(const RawRecording& recording,
                   const std::filesystem::path& path);

// Survey CSV: header `participant_id,pcl5,prom_dep8b,panic_sleep,sf12`.
// Empty cells mean absent. Rejects out-of-range scores and duplicate
// participant ids.
std::vector<SurveyRecord> parse_survey_csv(const std::filesystem::path& path);

void write_survey_csv(const std::vector<SurveyRecord>& records,
                      const std::filesystem::path& path);

}  // namespace actirep::ingest

#endif  // ACTIREP_INGEST_HPP_
