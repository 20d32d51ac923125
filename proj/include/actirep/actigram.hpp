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

#ifndef ACTIREP_ACTIGRAM_HPP_
#define ACTIREP_ACTIGRAM_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "actirep/signal.hpp"

namespace actirep::actigram {

// Day-by-time matrix of normalized activity in [0, 1]; the model input.
struct ActigraphyMap {
  std::string participant_id;
  int days = 28;
  int bins_per_day = 1440;
  std::vector<float> values;  // row-major, days x bins_per_day
  double missing_fraction = 0.0;

  float at(int day, int bin) const {
    return values[static_cast<std::size_t>(day) * bins_per_day + bin];
  }
  float& at(int day, int bin) {
    return values[static_cast<std::size_t>(day) * bins_per_day + bin];
  }
};

struct MapConfig {
  int days = 28;
  int bin_seconds = 60;          // multiple of 30, divides 86400
  double normalization_cap = 0;  // dataset-level count cap C_max; must be > 0

  int bins_per_day() const { return 86400 / bin_seconds; }
};

void validate(const MapConfig& cfg);

enum class ExcludeReason { TooShort, TooMissing };

struct Excluded {
  ExcludeReason reason;
};

using BuildResult = std::variant<ActigraphyMap, Excluded>;

// Aggregates epochs into bins by summation, zero-fills missing epochs,
// excludes the participant when more than half of the window's epochs are
// missing (exactly half is admitted), and normalizes each bin count as
// log(1 + count) / log(1 + cap), clipped to [0, 1].
BuildResult build_map(const signal::EpochSeries& series, const MapConfig& cfg);

// Dataset-level cap: the 99.5th percentile (nearest-rank) of nonzero bin
// counts over the training series. Run as a sequential pass before any map
// is normalized.
double fit_normalization_cap(const std::vector<signal::EpochSeries>& training,
                             const MapConfig& cfg);

// Raw (unnormalized) bin counts for one series; missing epochs contribute 0.
// Helper shared by build_map and fit_normalization_cap.
std::vector<double> aggregate_bins(const signal::EpochSeries& series,
                                   const MapConfig& cfg);

// Double-plot actogram: one column per consecutive day pair, day k stacked
// above day k+1. 8-bit grayscale PGM (P5), width days-1, height
// 2*bins_per_day.
void render_double_plot(const ActigraphyMap& map,
                        const std::filesystem::path& path);

// `AMAP` binary format: magic, version u16 LE, rows u32 LE, cols u32 LE,
// id_len u16 LE, id bytes, then rows*cols little-endian 32-bit floats.
std::vector<std::uint8_t> save_map(const ActigraphyMap& map);
ActigraphyMap load_map(const std::vector<std::uint8_t>& bytes);

void save_map_file(const ActigraphyMap& map, const std::filesystem::path& path);
ActigraphyMap load_map_file(const std::filesystem::path& path);

}  // namespace actirep::actigram

#endif  // ACTIREP_ACTIGRAM_HPP_
