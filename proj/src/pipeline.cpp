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

#include "actirep/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace actirep::pipeline {

namespace {

signal::EpochSeries participant_epochs(sim::SimulatedParticipant&& participant,
                                       const signal::FilterSpec& filter) {
  std::vector<double> filtered = signal::bandpass(participant.z, filter);
  participant.z.clear();
  participant.z.shrink_to_fit();
  signal::EpochSeries series = signal::epoch_counts(
      filtered, participant.timestamps_ms, filter.sample_rate_hz);
  series.participant_id = participant.id;
  return series;
}

}  // namespace

PreparedCohort prepare_simulated_cohort(const sim::CohortSpec& spec,
                                        const actigram::MapConfig& map_cfg,
                                        const signal::FilterSpec& filter,
                                        int jobs) {
  sim::validate(spec);
  if (jobs <= 0) {
    jobs = static_cast<int>(
        std::clamp(std::thread::hardware_concurrency(), 1u, 2u));
  }

  const int n = spec.n_participants;
  std::vector<signal::EpochSeries> series(static_cast<std::size_t>(n));
  std::vector<BinaryClass> labels(static_cast<std::size_t>(n));
  std::vector<ingest::SurveyRecord> surveys(static_cast<std::size_t>(n));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int index = next.fetch_add(1);
      if (index >= n) return;
      sim::SimulatedParticipant participant =
          sim::simulate_participant(spec, index);
      labels[static_cast<std::size_t>(index)] = participant.label;
      surveys[static_cast<std::size_t>(index)] = participant.survey;
      series[static_cast<std::size_t>(index)] =
          participant_epochs(std::move(participant), filter);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();
  }

  PreparedCohort cohort;
  actigram::MapConfig cfg = map_cfg;
  cfg.normalization_cap = actigram::fit_normalization_cap(series, cfg);
  cohort.normalization_cap = cfg.normalization_cap;

  for (int index = 0; index < n; ++index) {
    actigram::BuildResult result =
        actigram::build_map(series[static_cast<std::size_t>(index)], cfg);
    if (std::holds_alternative<actigram::Excluded>(result)) {
      ++cohort.excluded;
      continue;
    }
    cohort.maps.push_back(std::get<actigram::ActigraphyMap>(std::move(result)));
    cohort.truth_labels.push_back(labels[static_cast<std::size_t>(index)]);
    cohort.surveys.push_back(surveys[static_cast<std::size_t>(index)]);
  }
  return cohort;
}

PrepSummary prep_directory(const std::filesystem::path& raw_dir,
                           const std::filesystem::path& out_dir,
                           actigram::MapConfig map_cfg,
                           const signal::FilterSpec& filter) {
  require(std::filesystem::is_directory(raw_dir), ErrorCode::IoError,
          raw_dir.string() + " is not a directory");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  require(std::filesystem::is_directory(out_dir), ErrorCode::IoError,
          "cannot create " + out_dir.string());

  std::vector<std::filesystem::path> raw_files;
  for (const auto& entry : std::filesystem::directory_iterator(raw_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::filesystem::path& path = entry.path();
    if (path.extension() != ".csv") continue;
    if (path.filename() == "survey.csv") continue;
    raw_files.push_back(path);
  }
  std::sort(raw_files.begin(), raw_files.end());
  require(!raw_files.empty(), ErrorCode::IoError,
          "no raw csv files under " + raw_dir.string());

  std::vector<signal::EpochSeries> series;
  series.reserve(raw_files.size());
  for (const auto& path : raw_files) {
    const ingest::RawRecording recording = ingest::parse_raw_csv(path);
    std::vector<double> z(recording.samples.size());
    std::vector<std::int64_t> timestamps(recording.samples.size());
    for (std::size_t i = 0; i < recording.samples.size(); ++i) {
      z[i] = recording.samples[i].z;
      timestamps[i] = recording.samples[i].timestamp_ms;
    }
    signal::FilterSpec spec = filter;
    spec.sample_rate_hz = recording.nominal_rate_hz;
    std::vector<double> filtered = signal::bandpass(z, spec);
    signal::EpochSeries entry =
        signal::epoch_counts(filtered, timestamps, spec.sample_rate_hz);
    entry.participant_id = recording.participant_id;
    series.push_back(std::move(entry));
  }

  if (map_cfg.normalization_cap <= 0.0) {
    map_cfg.normalization_cap =
        actigram::fit_normalization_cap(series, map_cfg);
  }

  PrepSummary summary;
  summary.normalization_cap = map_cfg.normalization_cap;
  for (const signal::EpochSeries& entry : series) {
    actigram::BuildResult result = actigram::build_map(entry, map_cfg);
    if (std::holds_alternative<actigram::Excluded>(result)) {
      ++summary.excluded;
      continue;
    }
    const auto& map = std::get<actigram::ActigraphyMap>(result);
    actigram::save_map_file(map, out_dir / (map.participant_id + ".amap"));
    ++summary.written;
  }
  return summary;
}

eval::Dataset assemble_dataset(
    const std::vector<actigram::ActigraphyMap>& maps,
    const std::vector<vae::LatentCode>& codes,
    const std::vector<ingest::SurveyRecord>& surveys,
    const labels::ExperimentSpec& spec) {
  require(maps.size() == surveys.size(), ErrorCode::LengthMismatch,
          "maps and surveys differ in length");
  require(codes.empty() || codes.size() == maps.size(),
          ErrorCode::LengthMismatch, "codes and maps differ in length");
  eval::Dataset dataset;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const labels::Outcome outcome = labels::assign_label(surveys[i], spec);
    if (outcome == labels::Outcome::Ineligible) continue;
    eval::Participant participant;
    participant.id = maps[i].participant_id;
    participant.label = outcome == labels::Outcome::Unhealthy
                            ? BinaryClass::Unhealthy
                            : BinaryClass::Healthy;
    participant.map = &maps[i];
    if (!codes.empty()) {
      participant.features = labels::raw_features(codes[i], surveys[i], spec);
    }
    dataset.participants.push_back(std::move(participant));
  }
  return dataset;
}

std::size_t median_activity_index(
    const std::vector<actigram::ActigraphyMap>& maps) {
  require(!maps.empty(), ErrorCode::InsufficientData, "no maps");
  std::vector<std::pair<double, std::size_t>> totals;
  totals.reserve(maps.size());
  for (std::size_t i = 0; i < maps.size(); ++i) {
    double total = 0.0;
    for (float value : maps[i].values) total += value;
    totals.emplace_back(total, i);
  }
  std::sort(totals.begin(), totals.end());
  return totals[totals.size() / 2].second;
}

}  // namespace actirep::pipeline
