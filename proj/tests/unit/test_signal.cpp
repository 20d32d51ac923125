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

#include "actirep/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "actirep/common.hpp"
#include "actirep/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace actirep;
using signal::EpochSeries;
using signal::FilterSpec;

namespace {

std::vector<double> sine_wave(double freq_hz, double seconds, double fs) {
  const std::size_t n = static_cast<std::size_t>(seconds * fs);
  std::vector<double> wave(n);
  for (std::size_t i = 0; i < n; ++i) {
    wave[i] = std::sin(2.0 * std::numbers::pi * freq_hz *
                       static_cast<double>(i) / fs);
  }
  return wave;
}

// Steady-state amplitude away from the edges.
double central_peak(const std::vector<double>& y) {
  double peak = 0.0;
  for (std::size_t i = y.size() / 4; i < 3 * y.size() / 4; ++i) {
    peak = std::max(peak, std::abs(y[i]));
  }
  return peak;
}

std::vector<std::int64_t> uniform_timestamps(std::size_t n) {
  std::vector<std::int64_t> ts(n);
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = static_cast<std::int64_t>(i) * 100 / 3;
  }
  return ts;
}

}  // namespace

TEST_SUITE("signal") {

TEST_CASE("filter spec validation") {
  CHECK_NOTHROW(signal::validate(FilterSpec{}));
  CHECK_THROWS_AS(signal::validate(FilterSpec{.low_cut_hz = 0.0}), Error);
  CHECK_THROWS_AS(signal::validate(FilterSpec{.low_cut_hz = 12.0}), Error);
  CHECK_THROWS_AS(signal::validate(FilterSpec{.high_cut_hz = 15.0}), Error);
  CHECK_THROWS_AS(signal::validate(FilterSpec{.order = 0}), Error);
}

TEST_CASE("constant input is rejected") {
  std::vector<double> constant(600, 0.5);
  const auto filtered = signal::bandpass(constant, FilterSpec{});
  REQUIRE(filtered.size() == constant.size());
  double peak = 0.0;
  for (double v : filtered) peak = std::max(peak, std::abs(v));
  CHECK(peak < 1e-3);
}

TEST_CASE("passband and stopband amplitudes match the response oracle") {
  const FilterSpec spec;
  const auto coeffs = signal::design_bandpass(spec);

  // Zero-phase filtering applies |H| twice.
  auto expected = [&](double freq) {
    const double h = signal::magnitude_response(coeffs, freq, spec.sample_rate_hz);
    return h * h;
  };

  const auto in_band = signal::bandpass(sine_wave(1.0, 30.0, 30.0), spec);
  const double amp_1hz = central_peak(in_band);
  CHECK(amp_1hz > 0.9);
  CHECK(amp_1hz < 1.1);
  CHECK(amp_1hz == doctest::Approx(expected(1.0)).epsilon(0.02));

  const auto above_band = signal::bandpass(sine_wave(14.0, 30.0, 30.0), spec);
  const double amp_14hz = central_peak(above_band);
  CHECK(amp_14hz < 0.1);
  CHECK(amp_14hz == doctest::Approx(expected(14.0)).epsilon(0.5));
}

TEST_CASE("linearity") {
  Rng rng(41);
  std::vector<double> x(900), y(900);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  for (double& v : y) v = rng.uniform(-1.0, 1.0);
  const double a = rng.uniform(-10.0, 10.0);
  const double b = rng.uniform(-10.0, 10.0);
  std::vector<double> combined(900);
  for (std::size_t i = 0; i < x.size(); ++i) combined[i] = a * x[i] + b * y[i];

  const FilterSpec spec;
  const auto fx = signal::bandpass(x, spec);
  const auto fy = signal::bandpass(y, spec);
  const auto fc = signal::bandpass(combined, spec);
  double residual = 0.0;
  for (std::size_t i = 0; i < fc.size(); ++i) {
    residual = std::max(residual, std::abs(fc[i] - a * fx[i] - b * fy[i]));
  }
  CHECK(residual < 1e-9);
}

TEST_CASE("too short sequence") {
  std::vector<double> tiny(3, 0.0);
  CHECK_THROWS_AS(signal::bandpass(tiny, FilterSpec{}), Error);
}

TEST_CASE("zero signal over 60 s") {
  const std::size_t n = 1800;
  std::vector<double> zeros(n, 0.0);
  const EpochSeries series =
      signal::epoch_counts(zeros, uniform_timestamps(n), 30.0);
  REQUIRE(series.counts.size() == 2);
  CHECK(series.counts[0] == 0.0);
  CHECK(series.counts[1] == 0.0);
  CHECK(series.missing[0] == 0);
  CHECK(series.missing[1] == 0);
}

TEST_CASE("one unit sample per second sums to 30") {
  // 30 s of signal, exactly one 1.0 sample in each second.
  std::vector<double> x(900, 0.0);
  for (int s = 0; s < 30; ++s) x[static_cast<std::size_t>(s) * 30 + 7] = 1.0;
  const auto ts = uniform_timestamps(900);
  const EpochSeries series = signal::epoch_counts(x, ts, 30.0);
  const auto oracle = oracles::epoch_counts_bruteforce(x, ts);
  REQUIRE(series.counts.size() == 1);
  CHECK(series.counts[0] == 30.0);
  CHECK(series.counts[0] == oracle.counts[0]);
}

TEST_CASE("timestamp gap marks the second epoch missing") {
  // 30 s of data, a gap covering nearly all of the next epoch, one trailing
  // sample. The partial data in the gapped epoch is zero-filled.
  std::vector<double> x(901, 0.25);
  std::vector<std::int64_t> ts = uniform_timestamps(900);
  ts.push_back(59967);
  x.back() = 0.8;
  const EpochSeries series = signal::epoch_counts(x, ts, 30.0);
  REQUIRE(series.counts.size() == 2);
  CHECK(series.missing[0] == 0);
  CHECK(series.counts[0] > 0.0);
  CHECK(series.missing[1] == 1);
  CHECK(series.counts[1] == 0.0);

  const auto oracle = oracles::epoch_counts_bruteforce(x, ts);
  for (std::size_t e = 0; e < series.counts.size(); ++e) {
    CHECK(series.counts[e] == oracle.counts[e]);
    CHECK(series.missing[e] == oracle.missing[e]);
  }
}

TEST_CASE("epoch errors") {
  std::vector<double> x(10, 0.0);
  CHECK_THROWS_AS(signal::epoch_counts(x, uniform_timestamps(9), 30.0), Error);
  std::vector<std::int64_t> bad = uniform_timestamps(10);
  std::swap(bad[4], bad[5]);
  CHECK_THROWS_AS(signal::epoch_counts(x, bad, 30.0), Error);
}

TEST_CASE("oracle equivalence on random gapped signals") {
  Rng rng(1234);
  for (int trial = 0; trial < 100; ++trial) {
    // Up to ~2 minutes with random dropouts.
    std::vector<double> x;
    std::vector<std::int64_t> ts;
    std::int64_t t = 0;
    const int n = 600 + static_cast<int>(rng.uniform_index(3000));
    for (int i = 0; i < n; ++i) {
      t += 33 + static_cast<std::int64_t>(
                    rng.uniform01() < 0.01 ? rng.uniform_index(20000) : 0);
      ts.push_back(t);
      x.push_back(rng.normal(0.0, 1.0));
    }
    const EpochSeries series = signal::epoch_counts(x, ts, 30.0);
    const auto oracle = oracles::epoch_counts_bruteforce(x, ts);
    REQUIRE(series.counts.size() == oracle.counts.size());
    for (std::size_t e = 0; e < series.counts.size(); ++e) {
      CHECK(series.counts[e] == oracle.counts[e]);  // bitwise
      CHECK(series.missing[e] == oracle.missing[e]);
    }
  }
}

TEST_CASE("scale homogeneity") {
  Rng rng(7);
  std::vector<double> x(2700);
  for (double& v : x) v = rng.normal(0.0, 1.0);
  const auto ts = uniform_timestamps(x.size());
  const double c = 3.7;
  std::vector<double> scaled(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = c * x[i];
  const auto base = signal::epoch_counts(x, ts, 30.0);
  const auto grown = signal::epoch_counts(scaled, ts, 30.0);
  for (std::size_t e = 0; e < base.counts.size(); ++e) {
    CHECK(grown.counts[e] ==
          doctest::Approx(c * base.counts[e]).epsilon(1e-12));
  }
}

TEST_CASE("permutation within one second leaves counts unchanged") {
  Rng rng(99);
  std::vector<double> x(900);
  for (double& v : x) v = rng.normal(0.0, 1.0);
  const auto ts = uniform_timestamps(x.size());
  const auto base = signal::epoch_counts(x, ts, 30.0);
  // Rotate the values inside second 12 (samples 360..389).
  std::rotate(x.begin() + 360, x.begin() + 371, x.begin() + 390);
  const auto permuted = signal::epoch_counts(x, ts, 30.0);
  for (std::size_t e = 0; e < base.counts.size(); ++e) {
    CHECK(base.counts[e] == permuted.counts[e]);
  }
}

TEST_CASE("epoch csv round trip") {
  EpochSeries series;
  series.participant_id = "p1";
  series.counts = {0.0, 12.25, 3.5e-3};
  series.missing = {0, 0, 1};
  const auto path = std::filesystem::temp_directory_path() / "epochs_test.csv";
  signal::write_epoch_csv(series, path);
  const EpochSeries loaded = signal::read_epoch_csv(path);
  REQUIRE(loaded.counts.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(loaded.counts[i] == series.counts[i]);
    CHECK(loaded.missing[i] == series.missing[i]);
  }
  std::filesystem::remove(path);
}

}  // TEST_SUITE
