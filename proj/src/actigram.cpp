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

#include "actirep/actigram.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "actirep/common.hpp"

namespace actirep::actigram {

namespace {

constexpr char kMagic[4] = {'A', 'M', 'A', 'P'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t value) {
  out.push_back(static_cast<std::uint8_t>(value & 0xff));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void read(void* dest, std::size_t count) {
    require(position_ + count <= bytes_.size(), ErrorCode::TruncatedFile,
            "map payload ends early");
    std::memcpy(dest, bytes_.data() + position_, count);
    position_ += count;
  }

  std::uint16_t u16() {
    std::uint8_t raw[2];
    read(raw, 2);
    return static_cast<std::uint16_t>(raw[0] | (raw[1] << 8));
  }

  std::uint32_t u32() {
    std::uint8_t raw[4];
    read(raw, 4);
    return static_cast<std::uint32_t>(raw[0]) | (raw[1] << 8u) |
           (raw[2] << 16u) | (static_cast<std::uint32_t>(raw[3]) << 24u);
  }

  bool exhausted() const { return position_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t position_ = 0;
};

}  // namespace

void validate(const MapConfig& cfg) {
  require(cfg.days >= 1, ErrorCode::UsageError, "days must be >= 1");
  require(cfg.bin_seconds >= 30 && cfg.bin_seconds % 30 == 0 &&
              86400 % cfg.bin_seconds == 0,
          ErrorCode::UsageError,
          "bin_seconds must be a multiple of 30 dividing 86400");
  require(cfg.normalization_cap > 0, ErrorCode::UsageError,
          "normalization_cap must be > 0");
}

std::vector<double> aggregate_bins(const signal::EpochSeries& series,
                                   const MapConfig& cfg) {
  const int epochs_per_bin = cfg.bin_seconds / 30;
  const std::size_t total_bins =
      static_cast<std::size_t>(cfg.days) * cfg.bins_per_day();
  std::vector<double> bins(total_bins, 0.0);
  for (std::size_t bin = 0; bin < total_bins; ++bin) {
    double sum = 0.0;
    for (int k = 0; k < epochs_per_bin; ++k) {
      const std::size_t epoch = bin * epochs_per_bin + k;
      if (epoch < series.counts.size() && !series.missing[epoch]) {
        sum += series.counts[epoch];
      }
    }
    bins[bin] = sum;
  }
  return bins;
}

BuildResult build_map(const signal::EpochSeries& series, const MapConfig& cfg) {
  validate(cfg);
  const std::size_t epochs_needed =
      static_cast<std::size_t>(cfg.days) * 86400 / 30;
  if (series.counts.size() < epochs_needed) {
    return Excluded{ExcludeReason::TooShort};
  }

  std::size_t missing_epochs = 0;
  for (std::size_t epoch = 0; epoch < epochs_needed; ++epoch) {
    if (series.missing[epoch]) ++missing_epochs;
  }
  const double missing_fraction =
      static_cast<double>(missing_epochs) / static_cast<double>(epochs_needed);
  if (missing_fraction > 0.5) {
    return Excluded{ExcludeReason::TooMissing};
  }

  ActigraphyMap map;
  map.participant_id = series.participant_id;
  map.days = cfg.days;
  map.bins_per_day = cfg.bins_per_day();
  map.missing_fraction = missing_fraction;

  const std::vector<double> bins = aggregate_bins(series, cfg);
  map.values.resize(bins.size());
  const double denom = std::log1p(cfg.normalization_cap);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const double normalized = std::log1p(bins[i]) / denom;
    map.values[i] = static_cast<float>(std::clamp(normalized, 0.0, 1.0));
  }
  return map;
}

double fit_normalization_cap(const std::vector<signal::EpochSeries>& training,
                             const MapConfig& cfg) {
  std::vector<double> nonzero_counts;
  for (const signal::EpochSeries& series : training) {
    for (double count : aggregate_bins(series, cfg)) {
      if (count > 0.0) nonzero_counts.push_back(count);
    }
  }
  require(!nonzero_counts.empty(), ErrorCode::InsufficientData,
          "no nonzero counts in training series");
  std::sort(nonzero_counts.begin(), nonzero_counts.end());
  // Nearest-rank 99.5th percentile.
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(0.995 * static_cast<double>(nonzero_counts.size())));
  return nonzero_counts[std::min(rank, nonzero_counts.size()) - 1];
}

void render_double_plot(const ActigraphyMap& map,
                        const std::filesystem::path& path) {
  require(map.days >= 2, ErrorCode::UsageError,
          "double plot needs at least 2 days");
  const int width = map.days - 1;
  const int height = 2 * map.bins_per_day;
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoError, "cannot open " + path.string());
  out << "P5\n" << width << " " << height << "\n255\n";
  std::vector<std::uint8_t> row(width);
  for (int r = 0; r < height; ++r) {
    const int day_offset = r < map.bins_per_day ? 0 : 1;
    const int bin = r % map.bins_per_day;
    for (int c = 0; c < width; ++c) {
      const float value = map.at(c + day_offset, bin);
      row[c] = static_cast<std::uint8_t>(std::lround(value * 255.0f));
    }
    out.write(reinterpret_cast<const char*>(row.data()), width);
  }
  require(out.good(), ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<std::uint8_t> save_map(const ActigraphyMap& map) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(16 + map.participant_id.size() + map.values.size() * 4);
  bytes.insert(bytes.end(), kMagic, kMagic + 4);
  put_u16(bytes, kVersion);
  put_u32(bytes, static_cast<std::uint32_t>(map.days));
  put_u32(bytes, static_cast<std::uint32_t>(map.bins_per_day));
  put_u16(bytes, static_cast<std::uint16_t>(map.participant_id.size()));
  bytes.insert(bytes.end(), map.participant_id.begin(),
               map.participant_id.end());
  static_assert(sizeof(float) == 4);
  for (float value : map.values) {
    std::uint32_t raw;
    std::memcpy(&raw, &value, 4);
    put_u32(bytes, raw);
  }
  return bytes;
}

ActigraphyMap load_map(const std::vector<std::uint8_t>& bytes) {
  Reader reader(bytes);
  char magic[4];
  reader.read(magic, 4);
  require(std::memcmp(magic, kMagic, 4) == 0, ErrorCode::BadMagic,
          "not an AMAP payload");
  const std::uint16_t version = reader.u16();
  require(version == kVersion, ErrorCode::VersionMismatch,
          "unsupported version " + std::to_string(version));
  ActigraphyMap map;
  map.days = static_cast<int>(reader.u32());
  map.bins_per_day = static_cast<int>(reader.u32());
  const std::uint16_t id_len = reader.u16();
  map.participant_id.resize(id_len);
  if (id_len > 0) reader.read(map.participant_id.data(), id_len);
  const std::size_t count =
      static_cast<std::size_t>(map.days) * map.bins_per_day;
  map.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t raw = reader.u32();
    std::memcpy(&map.values[i], &raw, 4);
  }
  return map;
}

void save_map_file(const ActigraphyMap& map,
                   const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = save_map(map);
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoError, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  require(out.good(), ErrorCode::IoError, "write failed for " + path.string());
}

ActigraphyMap load_map_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return load_map(bytes);
}

}  // namespace actirep::actigram
