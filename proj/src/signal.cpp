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
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "actirep/common.hpp"

namespace actirep::signal {

namespace {

using Complex = std::complex<double>;

// Expands prod_k (x - roots[k]) into real monomial coefficients, highest
// degree first. Roots must be closed under conjugation.
std::vector<double> poly_from_roots(const std::vector<Complex>& roots) {
  std::vector<Complex> coeffs{1.0};
  for (const Complex& root : roots) {
    coeffs.push_back(0.0);
    for (std::size_t i = coeffs.size() - 1; i > 0; --i) {
      coeffs[i] -= root * coeffs[i - 1];
    }
  }
  std::vector<double> real_coeffs(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    real_coeffs[i] = coeffs[i].real();
  }
  return real_coeffs;
}

// Solves the dense system M x = rhs with partial pivoting. Used only for the
// small steady-state initial-condition system.
std::vector<double> solve_dense(std::vector<std::vector<double>> m,
                                std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < n; ++row) {
      if (std::abs(m[row][col]) > std::abs(m[pivot][col])) pivot = row;
    }
    std::swap(m[col], m[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (std::size_t row = col + 1; row < n; ++row) {
      const double factor = m[row][col] / m[col][col];
      for (std::size_t k = col; k < n; ++k) m[row][k] -= factor * m[col][k];
      rhs[row] -= factor * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) acc -= m[i][k] * x[k];
    x[i] = acc / m[i][i];
  }
  return x;
}

// Steady-state direct-form-II-transposed state for a unit step input.
std::vector<double> steady_state_zi(const BandpassCoefficients& coeffs) {
  const std::size_t n = coeffs.a.size() - 1;
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  std::vector<double> rhs(n);
  // (I - A^T) zi = B with A the companion matrix of a.
  for (std::size_t i = 0; i < n; ++i) {
    m[i][0] = coeffs.a[i + 1];
    if (i + 1 < n) m[i][i + 1] = -1.0;
    m[i][i] += 1.0;
    rhs[i] = coeffs.b[i + 1] - coeffs.a[i + 1] * coeffs.b[0];
  }
  return solve_dense(std::move(m), std::move(rhs));
}

// Direct form II transposed with compile-time state count, so the state
// stays in registers. `step` is +1 for a forward pass and -1 for the
// time-reversed pass (identical arithmetic to filtering the reversed array).
template <int N>
void filter_fixed(const double* b, const double* a, double* x,
                  std::size_t count, const double* zi, int step) {
  double state[N];
  for (int j = 0; j < N; ++j) state[j] = zi[j];
  double* cursor = step > 0 ? x : x + count - 1;
  for (std::size_t i = 0; i < count; ++i) {
    const double in = *cursor;
    const double out = b[0] * in + state[0];
    for (int j = 0; j + 1 < N; ++j) {
      state[j] = b[j + 1] * in + state[j + 1] - a[j + 1] * out;
    }
    state[N - 1] = b[N] * in - a[N] * out;
    *cursor = out;
    cursor += step;
  }
}

// In place, with initial state zi (already scaled).
void filter_in_place(const BandpassCoefficients& coeffs,
                     std::vector<double>& x, std::vector<double> zi,
                     int step) {
  const std::vector<double>& b = coeffs.b;
  const std::vector<double>& a = coeffs.a;
  const std::size_t n = zi.size();
  switch (n) {
    case 2: filter_fixed<2>(b.data(), a.data(), x.data(), x.size(), zi.data(), step); return;
    case 4: filter_fixed<4>(b.data(), a.data(), x.data(), x.size(), zi.data(), step); return;
    case 6: filter_fixed<6>(b.data(), a.data(), x.data(), x.size(), zi.data(), step); return;
    case 8: filter_fixed<8>(b.data(), a.data(), x.data(), x.size(), zi.data(), step); return;
    case 12: filter_fixed<12>(b.data(), a.data(), x.data(), x.size(), zi.data(), step); return;
    case 16: filter_fixed<16>(b.data(), a.data(), x.data(), x.size(), zi.data(), step); return;
    default: break;
  }
  double* cursor = step > 0 ? x.data() : x.data() + x.size() - 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double in = *cursor;
    const double out = b[0] * in + zi[0];
    for (std::size_t j = 0; j + 1 < n; ++j) {
      zi[j] = b[j + 1] * in + zi[j + 1] - a[j + 1] * out;
    }
    zi[n - 1] = b[n] * in - a[n] * out;
    *cursor = out;
    cursor += step;
  }
}

}  // namespace

void validate(const FilterSpec& spec) {
  const bool ok = spec.order >= 1 && spec.low_cut_hz > 0.0 &&
                  spec.low_cut_hz < spec.high_cut_hz &&
                  spec.high_cut_hz < spec.sample_rate_hz / 2.0;
  require(ok, ErrorCode::InvalidFilterSpec,
          "need 0 < low < high < sample_rate/2 and order >= 1");
}

BandpassCoefficients design_bandpass(const FilterSpec& spec) {
  validate(spec);
  const int order = spec.order;
  const double fs2 = 2.0 * spec.sample_rate_hz;
  // Prewarped analog band edges.
  const double w1 =
      fs2 * std::tan(std::numbers::pi * spec.low_cut_hz / spec.sample_rate_hz);
  const double w2 =
      fs2 * std::tan(std::numbers::pi * spec.high_cut_hz / spec.sample_rate_hz);
  const double bw = w2 - w1;
  const double w0_sq = w1 * w2;

  // Analog prototype poles on the unit circle, then the lowpass-to-bandpass
  // substitution s -> (s^2 + w0^2) / (bw * s): each prototype pole maps to a
  // conjugate pair solving s^2 - p*bw*s + w0^2 = 0.
  std::vector<Complex> analog_poles;
  analog_poles.reserve(2 * order);
  for (int k = 1; k <= order; ++k) {
    const double theta =
        std::numbers::pi * (2.0 * k + order - 1.0) / (2.0 * order);
    const Complex proto(std::cos(theta), std::sin(theta));
    const Complex half = proto * (bw / 2.0);
    const Complex disc = std::sqrt(half * half - w0_sq);
    analog_poles.push_back(half + disc);
    analog_poles.push_back(half - disc);
  }

  // Bilinear transform of poles; analog gain is bw^order with `order` zeros
  // at s = 0.
  std::vector<Complex> digital_poles;
  digital_poles.reserve(analog_poles.size());
  Complex gain = std::pow(Complex(bw, 0.0), order);
  for (const Complex& pole : analog_poles) {
    digital_poles.push_back((fs2 + pole) / (fs2 - pole));
    gain /= fs2 - pole;
  }
  // Analog zeros at s = 0 map to z = +1 and contribute (fs2 - 0) each; the
  // pole excess adds `order` zeros at z = -1.
  gain *= std::pow(Complex(fs2, 0.0), order);

  std::vector<Complex> digital_zeros(order, Complex(1.0, 0.0));
  digital_zeros.insert(digital_zeros.end(), order, Complex(-1.0, 0.0));

  BandpassCoefficients coeffs;
  coeffs.b = poly_from_roots(digital_zeros);
  for (double& value : coeffs.b) value *= gain.real();
  coeffs.a = poly_from_roots(digital_poles);
  return coeffs;
}

double magnitude_response(const BandpassCoefficients& coeffs, double freq_hz,
                          double sample_rate_hz) {
  const double omega = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
  const Complex z_inv = std::exp(Complex(0.0, -omega));
  Complex num = 0.0;
  Complex den = 0.0;
  Complex power = 1.0;
  for (std::size_t k = 0; k < coeffs.b.size(); ++k) {
    num += coeffs.b[k] * power;
    den += coeffs.a[k] * power;
    power *= z_inv;
  }
  return std::abs(num / den);
}

std::vector<double> bandpass(const std::vector<double>& z_samples,
                             const FilterSpec& spec) {
  const BandpassCoefficients coeffs = design_bandpass(spec);
  const std::size_t n = z_samples.size();
  require(n >= static_cast<std::size_t>(spec.order) + 1,
          ErrorCode::SequenceTooShort,
          "need at least order + 1 samples, got " + std::to_string(n));

  std::size_t pad = 3 * (coeffs.b.size());
  if (pad > n - 1) pad = n - 1;

  // Odd extension around both endpoints.
  std::vector<double> extended;
  extended.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) {
    extended.push_back(2.0 * z_samples.front() - z_samples[i]);
  }
  extended.insert(extended.end(), z_samples.begin(), z_samples.end());
  for (std::size_t i = 0; i < pad; ++i) {
    extended.push_back(2.0 * z_samples.back() - z_samples[n - 2 - i]);
  }

  const std::vector<double> zi = steady_state_zi(coeffs);
  auto scaled = [&zi](double x0) {
    std::vector<double> state(zi);
    for (double& value : state) value *= x0;
    return state;
  };

  filter_in_place(coeffs, extended, scaled(extended.front()), +1);
  filter_in_place(coeffs, extended, scaled(extended.back()), -1);

  return std::vector<double>(extended.begin() + pad, extended.begin() + pad + n);
}

EpochSeries epoch_counts(const std::vector<double>& filtered,
                         const std::vector<std::int64_t>& timestamps_ms,
                         double sample_rate_hz) {
  (void)sample_rate_hz;
  require(filtered.size() == timestamps_ms.size(), ErrorCode::LengthMismatch,
          "filtered and timestamp sequences differ in length");
  EpochSeries series;
  if (filtered.empty()) return series;
  series.start_ms = timestamps_ms.front();

  const std::int64_t start = series.start_ms;
  const std::int64_t span_ms = timestamps_ms.back() - start;
  const std::size_t n_epochs = static_cast<std::size_t>(span_ms / 30000) + 1;
  series.counts.assign(n_epochs, 0.0);
  series.missing.assign(n_epochs, 0);

  double window_max[30];
  bool window_present[30];
  std::size_t current_epoch = 0;
  std::fill(std::begin(window_max), std::end(window_max), 0.0);
  std::fill(std::begin(window_present), std::end(window_present), false);

  auto flush = [&](std::size_t epoch) {
    double count = 0.0;
    int empty_seconds = 0;
    for (int w = 0; w < 30; ++w) {
      if (window_present[w]) {
        count += window_max[w];
      } else {
        ++empty_seconds;
      }
    }
    if (empty_seconds > 15) {
      series.counts[epoch] = 0.0;  // zero-fill
      series.missing[epoch] = 1;
    } else {
      series.counts[epoch] = count;
      series.missing[epoch] = 0;
    }
    std::fill(std::begin(window_max), std::end(window_max), 0.0);
    std::fill(std::begin(window_present), std::end(window_present), false);
  };

  std::int64_t previous_ts = timestamps_ms.front() - 1;
  for (std::size_t i = 0; i < filtered.size(); ++i) {
    const std::int64_t ts = timestamps_ms[i];
    if (ts <= previous_ts) {
      throw Error(ErrorCode::NonMonotoneTimestamp,
                  "timestamp not strictly increasing at sample " +
                      std::to_string(i));
    }
    previous_ts = ts;
    const std::int64_t second = (ts - start) / 1000;
    const std::size_t epoch = static_cast<std::size_t>(second / 30);
    while (current_epoch < epoch) {
      flush(current_epoch);
      ++current_epoch;
    }
    const int window = static_cast<int>(second % 30);
    const double magnitude = std::abs(filtered[i]);
    if (!window_present[window] || magnitude > window_max[window]) {
      window_max[window] = magnitude;
      window_present[window] = true;
    }
  }
  flush(current_epoch);
  return series;
}

void write_epoch_csv(const EpochSeries& series,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot open " + path.string());
  out << "epoch_index,count,missing\n";
  char buffer[64];
  for (std::size_t i = 0; i < series.counts.size(); ++i) {
    std::snprintf(buffer, sizeof(buffer), "%zu,%.17g,%d\n", i,
                  series.counts[i], static_cast<int>(series.missing[i]));
    out << buffer;
  }
  require(out.good(), ErrorCode::IoError, "write failed for " + path.string());
}

EpochSeries read_epoch_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::EmptyFile,
          path.string());
  EpochSeries series;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string index_field, count_field, missing_field;
    std::getline(row, index_field, ',');
    std::getline(row, count_field, ',');
    std::getline(row, missing_field, ',');
    series.counts.push_back(std::stod(count_field));
    series.missing.push_back(missing_field == "1" ? 1 : 0);
  }
  return series;
}

}  // namespace actirep::signal
