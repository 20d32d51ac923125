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

#include "actirep/ingest.hpp"

#include <filesystem>
#include <fstream>

#include "actirep/common.hpp"
#include "actirep/simulate.hpp"
#include "doctest.h"

using namespace actirep;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("minimal well-formed raw file") {
  const auto path = temp_file("raw_min.csv");
  write_text(path, "timestamp_ms,x,y,z\n0,0,0,0\n33,0,0,0\n");
  const ingest::RawRecording recording = ingest::parse_raw_csv(path);
  CHECK(recording.samples.size() == 2);
  CHECK(recording.participant_id == "raw_min");
  CHECK(recording.samples[1].timestamp_ms == 33);
  std::filesystem::remove(path);
}

TEST_CASE("non-monotone timestamps are rejected") {
  const auto path = temp_file("raw_order.csv");
  write_text(path, "timestamp_ms,x,y,z\n33,0,0,0\n0,0,0,0\n");
  CHECK_THROWS_AS(ingest::parse_raw_csv(path), Error);
  try {
    ingest::parse_raw_csv(path);
  } catch (const Error& error) {
    CHECK(error.code() == ErrorCode::NonMonotoneTimestamp);
  }
  std::filesystem::remove(path);
}

TEST_CASE("empty and malformed files") {
  const auto path = temp_file("raw_bad.csv");
  write_text(path, "");
  CHECK_THROWS_AS(ingest::parse_raw_csv(path), Error);

  write_text(path, "timestamp_ms,x,y,z\n");
  CHECK_THROWS_AS(ingest::parse_raw_csv(path), Error);

  write_text(path, "timestamp_ms,x,y,z\n0,0,zero,0\n");
  try {
    ingest::parse_raw_csv(path);
    CHECK(false);
  } catch (const Error& error) {
    CHECK(error.code() == ErrorCode::MalformedRow);
    CHECK(std::string(error.what()).find("line 2") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("simulator output round-trips exactly") {
  sim::CohortSpec spec;
  spec.n_participants = 2;
  spec.days = 1;
  spec.seed = 404;
  sim::SimulatedParticipant participant = sim::simulate_participant(spec, 0);

  ingest::RawRecording recording;
  recording.participant_id = "roundtrip";
  for (std::size_t i = 0; i < 1000; ++i) {
    recording.samples.push_back(ingest::RawSample{
        participant.timestamps_ms[i], 0.001 * static_cast<double>(i),
        -0.25, participant.z[i]});
  }
  const auto path = temp_file("roundtrip.csv");
  ingest::write_raw_csv(recording, path);
  const ingest::RawRecording parsed = ingest::parse_raw_csv(path);
  CHECK(parsed == recording);
  std::filesystem::remove(path);
}

TEST_CASE("survey rows") {
  const auto path = temp_file("survey.csv");
  write_text(path,
             "participant_id,pcl5,prom_dep8b,panic_sleep,sf12\n"
             "p1,29,61,1,48\n"
             "p2,,,,\n");
  const auto records = ingest::parse_survey_csv(path);
  REQUIRE(records.size() == 2);
  CHECK(records[0].pcl5 == 29);
  CHECK(records[0].prom_dep8b == 61.0);
  CHECK(records[0].panic_sleep_item == 1);
  CHECK(records[0].sf12_prehealth == 48.0);
  CHECK_FALSE(records[1].pcl5.has_value());
  CHECK_FALSE(records[1].prom_dep8b.has_value());
  CHECK_FALSE(records[1].panic_sleep_item.has_value());
  CHECK_FALSE(records[1].sf12_prehealth.has_value());
  std::filesystem::remove(path);
}

TEST_CASE("survey range and duplicate checks") {
  const auto path = temp_file("survey_bad.csv");
  write_text(path,
             "participant_id,pcl5,prom_dep8b,panic_sleep,sf12\np3,85,,,\n");
  try {
    ingest::parse_survey_csv(path);
    CHECK(false);
  } catch (const Error& error) {
    CHECK(error.code() == ErrorCode::OutOfRangeScore);
  }

  write_text(path,
             "participant_id,pcl5,prom_dep8b,panic_sleep,sf12\n"
             "p1,10,,,\np1,11,,,\n");
  try {
    ingest::parse_survey_csv(path);
    CHECK(false);
  } catch (const Error& error) {
    CHECK(error.code() == ErrorCode::DuplicateParticipant);
  }

  write_text(path,
             "participant_id,pcl5,prom_dep8b,panic_sleep,sf12\np4,,,4,\n");
  CHECK_THROWS_AS(ingest::parse_survey_csv(path), Error);
  std::filesystem::remove(path);
}

TEST_CASE("survey csv write/parse round trip") {
  std::vector<ingest::SurveyRecord> records(2);
  records[0].participant_id = "a";
  records[0].pcl5 = 40;
  records[0].prom_dep8b = 63.5;
  records[0].panic_sleep_item = 2;
  records[0].sf12_prehealth = 41.25;
  records[1].participant_id = "b";

  const auto path = temp_file("survey_rt.csv");
  ingest::write_survey_csv(records, path);
  const auto parsed = ingest::parse_survey_csv(path);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].pcl5 == records[0].pcl5);
  CHECK(parsed[0].prom_dep8b == records[0].prom_dep8b);
  CHECK(parsed[0].panic_sleep_item == records[0].panic_sleep_item);
  CHECK(parsed[0].sf12_prehealth == records[0].sf12_prehealth);
  CHECK_FALSE(parsed[1].pcl5.has_value());
  std::filesystem::remove(path);
}

}  // TEST_SUITE
