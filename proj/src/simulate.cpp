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

#include "actirep/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "actirep/rng.hpp"
#include "json.hpp"

namespace actirep::sim {

namespace {

constexpr int kSampleRate = 30;
constexpr double kSensorNoiseG = 0.004;
constexpr double kGravityOffsetG = -0.62;
// Sensor-style quantization; keeps CSV rows compact without losing signal.
constexpr double kQuantum = 1e-5;

double quantize(double value) { return std::round(value / kQuantum) * kQuantum; }

struct ParticipantTraits {
  double amplitude = 0.3;
  double peak_day_fraction = 0.6;   // circadian peak position
  double harmonic_ratio = 0.4;      // 12 h component weight
  double harmonic_phase = 0.0;
  double wake_burst_prob = 0.55;
  double night_burst_prob = 0.01;
  double rest_threshold = 0.1;
};

ParticipantTraits draw_traits(Rng& rng, BinaryClass label,
                              const EffectSpec& effect) {
  ParticipantTraits traits;
  traits.amplitude = 0.30 * std::exp(rng.normal(0.0, 0.20));
  traits.peak_day_fraction = (14.5 + rng.normal(0.0, 0.6)) / 24.0;
  traits.harmonic_ratio = rng.uniform(0.25, 0.55);
  traits.harmonic_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  traits.wake_burst_prob = rng.uniform(0.45, 0.65);
  traits.night_burst_prob = rng.uniform(0.008, 0.015);
  if (label == BinaryClass::Unhealthy) {
    traits.amplitude *= 1.0 - effect.amplitude_drop;
    traits.peak_day_fraction += effect.phase_shift_hours / 24.0;
    traits.night_burst_prob *= 1.0 + 2.0 * effect.fragmentation_boost;
  }
  return traits;
}

// Rectified 24 h + 12 h sinusoid envelope in [0, ~2].
double envelope(const ParticipantTraits& traits, double day_fraction) {
  const double phase =
      2.0 * std::numbers::pi * (day_fraction - traits.peak_day_fraction);
  const double raw = std::cos(phase) +
                     traits.harmonic_ratio *
                         std::cos(2.0 * phase + traits.harmonic_phase) -
                     traits.rest_threshold;
  return raw > 0.0 ? raw : 0.0;
}

std::vector<std::uint8_t> draw_missing_mask(Rng& rng, std::int64_t total_seconds,
                                            double missing_rate) {
  std::vector<std::uint8_t> missing(
      static_cast<std::size_t>(total_seconds), 0);
  if (missing_rate <= 0.0) return missing;
  const std::int64_t target =
      static_cast<std::int64_t>(missing_rate * static_cast<double>(total_seconds));
  std::int64_t removed = 0;
  // Contiguous dropouts of 10 minutes to ~3 hours until the target is met.
  while (removed < target) {
    const std::int64_t start = static_cast<std::int64_t>(
        rng.uniform_index(static_cast<std::uint64_t>(total_seconds)));
    const std::int64_t duration =
        600 + static_cast<std::int64_t>(rng.uniform_index(10800));
    const std::int64_t end = std::min(start + duration, total_seconds);
    for (std::int64_t s = start; s < end && removed < target; ++s) {
      if (!missing[static_cast<std::size_t>(s)]) {
        missing[static_cast<std::size_t>(s)] = 1;
        ++removed;
      }
    }
  }
  return missing;
}

ingest::SurveyRecord draw_survey(Rng& rng, const std::string& id,
                                 BinaryClass label) {
  ingest::SurveyRecord record;
  record.participant_id = id;
  if (label == BinaryClass::Unhealthy) {
    record.pcl5 = 35 + static_cast<int>(rng.uniform_index(36));
    record.prom_dep8b = std::round(rng.uniform(62.0, 75.0) * 10.0) / 10.0;
    record.panic_sleep_item = 1 + static_cast<int>(rng.uniform_index(3));
    record.sf12_prehealth = std::round(rng.normal(43.0, 5.0) * 10.0) / 10.0;
  } else {
    record.pcl5 = static_cast<int>(rng.uniform_index(21));
    record.prom_dep8b = std::round(rng.uniform(40.0, 55.0) * 10.0) / 10.0;
    record.panic_sleep_item = 0;
    record.sf12_prehealth = std::round(rng.normal(52.0, 5.0) * 10.0) / 10.0;
  }
  return record;
}

}  // namespace

void validate(const CohortSpec& spec) {
  require(spec.n_participants >= 2 && spec.days >= 1, ErrorCode::UsageError,
          "need n_participants >= 2 and days >= 1");
  require(spec.unhealthy_fraction > 0.0 && spec.unhealthy_fraction < 1.0,
          ErrorCode::UsageError, "unhealthy_fraction must be in (0,1)");
  require(spec.missing_rate >= 0.0 && spec.missing_rate < 1.0,
          ErrorCode::UsageError, "missing_rate must be in [0,1)");
  require(spec.effect.amplitude_drop >= 0.0 &&
              spec.effect.amplitude_drop <= 1.0 &&
              spec.effect.fragmentation_boost >= 0.0,
          ErrorCode::UsageError, "invalid effect sizes");
}

SimulatedParticipant simulate_participant(const CohortSpec& spec, int index) {
  validate(spec);
  require(index >= 0 && index < spec.n_participants, ErrorCode::UsageError,
          "participant index out of range");

  SimulatedParticipant participant;
  char id[16];
  std::snprintf(id, sizeof(id), "p%04d", index);
  participant.id = id;
  const int n_unhealthy = static_cast<int>(
      std::lround(spec.unhealthy_fraction * spec.n_participants));
  participant.label =
      index < n_unhealthy ? BinaryClass::Unhealthy : BinaryClass::Healthy;

  const std::uint64_t participant_seed =
      derive_seed(spec.seed, "sim.participant." + participant.id);
  Rng traits_rng(derive_seed(participant_seed, "traits"));
  Rng z_rng(derive_seed(participant_seed, "z"));
  Rng missing_rng(derive_seed(participant_seed, "missing"));
  Rng survey_rng(derive_seed(participant_seed, "survey"));

  const ParticipantTraits traits =
      draw_traits(traits_rng, participant.label, spec.effect);
  participant.survey = draw_survey(survey_rng, participant.id,
                                   participant.label);

  const std::int64_t total_seconds =
      static_cast<std::int64_t>(spec.days) * 86400;
  const std::vector<std::uint8_t> missing =
      draw_missing_mask(missing_rng, total_seconds, spec.missing_rate);

  std::size_t kept_seconds = 0;
  for (std::uint8_t m : missing) kept_seconds += m == 0 ? 1u : 0u;
  participant.timestamps_ms.reserve(kept_seconds * kSampleRate);
  participant.z.reserve(kept_seconds * kSampleRate);

  // Millisecond offset of sample j within its second: floor(j * 1000 / 30).
  std::int64_t offset_ms[kSampleRate];
  for (int j = 0; j < kSampleRate; ++j) {
    offset_ms[j] = static_cast<std::int64_t>(j) * 1000 / kSampleRate;
  }
  for (std::int64_t second = 0; second < total_seconds; ++second) {
    // The per-second RNG draws happen unconditionally so the Z stream of the
    // kept seconds does not depend on the missing mask layout.
    const double day_fraction =
        static_cast<double>(second % 86400) / 86400.0;
    const double env = envelope(traits, day_fraction);
    double burst_amplitude = 0.0;
    const double coin = z_rng.uniform01();
    const double gain = z_rng.uniform01();
    if (env > 0.0) {
      const double p_active =
          std::min(traits.wake_burst_prob * (0.4 + env), 0.95);
      if (coin < p_active) {
        burst_amplitude = traits.amplitude * env * (0.6 + 0.8 * gain);
      }
    } else if (coin < traits.night_burst_prob) {
      burst_amplitude = traits.amplitude * (0.25 + 0.45 * gain);
    }
    const double spread = burst_amplitude + kSensorNoiseG;
    if (missing[static_cast<std::size_t>(second)] != 0) {
      for (int j = 0; j < kSampleRate; ++j) z_rng.uniform01();
      continue;
    }
    const std::int64_t base_ms = second * 1000;
    for (int j = 0; j < kSampleRate; ++j) {
      const double unit = 2.0 * z_rng.uniform01() - 1.0;
      participant.timestamps_ms.push_back(base_ms + offset_ms[j]);
      participant.z.push_back(quantize(kGravityOffsetG + spread * unit));
    }
  }
  return participant;
}

Manifest generate_cohort(const CohortSpec& spec,
                         const std::filesystem::path& out_dir) {
  validate(spec);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  require(std::filesystem::is_directory(out_dir), ErrorCode::IoError,
          "cannot create " + out_dir.string());

  Manifest manifest;
  std::vector<ingest::SurveyRecord> surveys;
  for (int index = 0; index < spec.n_participants; ++index) {
    SimulatedParticipant participant = simulate_participant(spec, index);
    const std::uint64_t participant_seed =
        derive_seed(spec.seed, "sim.participant." + participant.id);
    Rng xy_rng(derive_seed(participant_seed, "xy"));

    ingest::RawRecording recording;
    recording.participant_id = participant.id;
    recording.nominal_rate_hz = kSampleRate;
    recording.samples.resize(participant.z.size());
    for (std::size_t i = 0; i < participant.z.size(); ++i) {
      ingest::RawSample& sample = recording.samples[i];
      sample.timestamp_ms = participant.timestamps_ms[i];
      sample.z = participant.z[i];
      // Off-axis channels: attenuated movement plus noise.
      const double activity = std::abs(participant.z[i] - kGravityOffsetG);
      sample.x = quantize(0.3 * activity * (2.0 * xy_rng.uniform01() - 1.0) +
                          kSensorNoiseG * (2.0 * xy_rng.uniform01() - 1.0));
      sample.y = quantize(0.3 * activity * (2.0 * xy_rng.uniform01() - 1.0) +
                          kSensorNoiseG * (2.0 * xy_rng.uniform01() - 1.0));
    }
    const std::string file_name = participant.id + ".csv";
    ingest::write_raw_csv(recording, out_dir / file_name);

    manifest.participants.push_back(
        ManifestEntry{participant.id, participant.label, file_name});
    surveys.push_back(participant.survey);
  }

  manifest.survey_csv = "survey.csv";
  ingest::write_survey_csv(surveys, out_dir / manifest.survey_csv);

  nlohmann::ordered_json doc;
  doc["survey_csv"] = manifest.survey_csv;
  nlohmann::ordered_json by_id = nlohmann::ordered_json::object();
  for (const ManifestEntry& entry : manifest.participants) {
    by_id[entry.id] = {{"label", binary_class_name(entry.label)},
                       {"files", {entry.raw_csv}}};
  }
  doc["participants"] = by_id;
  std::ofstream out(out_dir / "manifest.json");
  require(out.good(), ErrorCode::IoError, "cannot write manifest");
  out << doc.dump(2) << "\n";
  return manifest;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json doc = nlohmann::json::parse(in);
  Manifest manifest;
  manifest.survey_csv = doc.at("survey_csv").get<std::string>();
  for (const auto& [id, entry] : doc.at("participants").items()) {
    ManifestEntry record;
    record.id = id;
    record.label = entry.at("label").get<std::string>() == "unhealthy"
                       ? BinaryClass::Unhealthy
                       : BinaryClass::Healthy;
    record.raw_csv = entry.at("files").at(0).get<std::string>();
    manifest.participants.push_back(std::move(record));
  }
  return manifest;
}

}  // namespace actirep::sim
