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

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "actirep/common.hpp"

namespace actirep::ingest {

namespace {

// Splits a CSV line on commas with no quoting (the formats here never quote).
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

void append_number(std::string& out, double value) {
  char buffer[32];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  out.append(buffer, ptr);
}

void strip_trailing_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

RawRecording parse_raw_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());

  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::EmptyFile,
          path.string());
  strip_trailing_cr(line);
  require(line == "timestamp_ms,x,y,z", ErrorCode::MalformedRow,
          "bad header in " + path.string());

  RawRecording recording;
  recording.participant_id = path.stem().string();

  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    strip_trailing_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    RawSample sample;
    const bool parsed = fields.size() == 4 &&
                        parse_number(fields[0], sample.timestamp_ms) &&
                        parse_number(fields[1], sample.x) &&
                        parse_number(fields[2], sample.y) &&
                        parse_number(fields[3], sample.z);
    require(parsed, ErrorCode::MalformedRow,
            path.string() + " line " + std::to_string(line_number));
    require(std::isfinite(sample.x) && std::isfinite(sample.y) &&
                std::isfinite(sample.z),
            ErrorCode::MalformedRow,
            path.string() + " line " + std::to_string(line_number) +
                ": non-finite acceleration");
    require(recording.samples.empty() ||
                sample.timestamp_ms > recording.samples.back().timestamp_ms,
            ErrorCode::NonMonotoneTimestamp,
            path.string() + " line " + std::to_string(line_number));
    recording.samples.push_back(sample);
  }
  require(!recording.samples.empty(), ErrorCode::EmptyFile,
          path.string() + ": no data rows");
  return recording;
}

void write_raw_csv(const RawRecording& recording,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoError, "cannot open " + path.string());
  std::string buffer = "timestamp_ms,x,y,z\n";
  buffer.reserve(1 << 20);
  for (const RawSample& sample : recording.samples) {
    buffer += std::to_string(sample.timestamp_ms);
    buffer += ',';
    append_number(buffer, sample.x);
    buffer += ',';
    append_number(buffer, sample.y);
    buffer += ',';
    append_number(buffer, sample.z);
    buffer += '\n';
    if (buffer.size() > (1 << 20) - 256) {
      out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
      buffer.clear();
    }
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  require(out.good(), ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<SurveyRecord> parse_survey_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());

  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::EmptyFile,
          path.string());
  strip_trailing_cr(line);
  require(line == "participant_id,pcl5,prom_dep8b,panic_sleep,sf12",
          ErrorCode::MalformedRow, "bad header in " + path.string());

  std::vector<SurveyRecord> records;
  std::set<std::string> seen_ids;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    strip_trailing_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    require(fields.size() == 5, ErrorCode::MalformedRow,
            path.string() + " line " + std::to_string(line_number));

    SurveyRecord record;
    record.participant_id = std::string(fields[0]);
    require(!record.participant_id.empty(), ErrorCode::MalformedRow,
            path.string() + " line " + std::to_string(line_number) +
                ": empty participant id");
    require(seen_ids.insert(record.participant_id).second,
            ErrorCode::DuplicateParticipant, record.participant_id);

    auto location = [&] {
      return path.string() + " line " + std::to_string(line_number);
    };
    if (!fields[1].empty()) {
      int value = 0;
      require(parse_number(fields[1], value), ErrorCode::MalformedRow,
              location());
      require(value >= 0 && value <= 80, ErrorCode::OutOfRangeScore,
              location() + ": pcl5 " + std::to_string(value));
      record.pcl5 = value;
    }
    if (!fields[2].empty()) {
      double value = 0.0;
      require(parse_number(fields[2], value) && std::isfinite(value),
              ErrorCode::MalformedRow, location());
      record.prom_dep8b = value;
    }
    if (!fields[3].empty()) {
      int value = 0;
      require(parse_number(fields[3], value), ErrorCode::MalformedRow,
              location());
      require(value >= 0 && value <= 3, ErrorCode::OutOfRangeScore,
              location() + ": panic_sleep " + std::to_string(value));
      record.panic_sleep_item = value;
    }
    if (!fields[4].empty()) {
      double value = 0.0;
      require(parse_number(fields[4], value) && std::isfinite(value),
              ErrorCode::MalformedRow, location());
      record.sf12_prehealth = value;
    }
    records.push_back(std::move(record));
  }
  return records;
}

void write_survey_csv(const std::vector<SurveyRecord>& records,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoError, "cannot open " + path.string());
  out << "participant_id,pcl5,prom_dep8b,panic_sleep,sf12\n";
  for (const SurveyRecord& record : records) {
    std::string row = record.participant_id;
    row += ',';
    if (record.pcl5) row += std::to_string(*record.pcl5);
    row += ',';
    if (record.prom_dep8b) append_number(row, *record.prom_dep8b);
    row += ',';
    if (record.panic_sleep_item) row += std::to_string(*record.panic_sleep_item);
    row += ',';
    if (record.sf12_prehealth) append_number(row, *record.sf12_prehealth);
    row += '\n';
    out << row;
  }
  require(out.good(), ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace actirep::ingest
