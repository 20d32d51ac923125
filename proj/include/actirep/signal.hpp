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

#ifndef ACTIREP_SIGNAL_HPP_
#define ACTIREP_SIGNAL_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace actirep::signal {

struct FilterSpec {
  double low_cut_hz = 0.25;
  double high_cut_hz = 11.0;
  int order = 4;
  double sample_rate_hz = 30.0;
};

// Throws InvalidFilterSpec unless 0 < low < high < sample_rate / 2 and
// order >= 1.
void validate(const FilterSpec& spec);

// Digital IIR bandpass as a single transfer function b(z)/a(z), a[0] == 1.
// Both vectors have length 2 * order + 1.
struct BandpassCoefficients {
  std::vector<double> b;
  std::vector<double> a;
};

// Butterworth bandpass designed with the bilinear transform (band edges
// prewarped).
BandpassCoefficients design_bandpass(const FilterSpec& spec);

// Single-pass magnitude |H(e^{j 2 pi f / fs})| of the designed filter. The
// zero-phase filter applies H twice, so its amplitude response is the square
// of this value.
double magnitude_response(const BandpassCoefficients& coeffs, double freq_hz,
                          double sample_rate_hz);

// Zero-phase (forward-backward) bandpass. The signal is extended at both ends
// by odd reflection and each pass starts from steady-state initial
// conditions, so constant inputs are rejected without a start-up transient.
// Output has the same length as the input.
std::vector<double> bandpass(const std::vector<double>& z_samples,
                             const FilterSpec& spec);

struct EpochSeries {
  std::string participant_id;
  std::int64_t start_ms = 0;
  int epoch_seconds = 30;
  std::vector<double> counts;
  std::vector<std::uint8_t> missing;  // 0/1, same length as counts
};

// Activity counts per 30 s epoch: the per-second maxima of |filtered| are
// summed over the epoch's 30 one-second windows. Windows are aligned to the
// first timestamp. An epoch with more than half of its seconds empty is
// marked missing and its count is zero-filled.
EpochSeries epoch_counts(const std::vector<double>& filtered,
                         const std::vector<std::int64_t>& timestamps_ms,
                         double sample_rate_hz);

void write_epoch_csv(const EpochSeries& series,
                     const std::filesystem::path& path);
EpochSeries read_epoch_csv(const std::filesystem::path& path);

}  // namespace actirep::signal

#endif  // ACTIREP_SIGNAL_HPP_
