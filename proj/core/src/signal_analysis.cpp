// Copyright 2026 The nvloop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nvloop/signal_analysis.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numeric>

#include "nvloop/constants.hpp"
#include "nvloop/errors.hpp"

namespace nvloop::signal {
namespace {

std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

std::vector<std::complex<double>> RealDft(const std::vector<double>& in) {
  const size_t n = in.size();
  const size_t n_out = n / 2 + 1;
  std::unique_ptr<double, FftwFree> buf(
      static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  std::unique_ptr<fftw_complex, FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_out)));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), buf.get(), out.get(),
                                FFTW_ESTIMATE);
  }
  std::copy(in.begin(), in.end(), buf.get());
  fftw_execute(plan);
  std::vector<std::complex<double>> result(n_out);
  for (size_t k = 0; k < n_out; ++k) {
    result[k] = {out.get()[k][0], out.get()[k][1]};
  }
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(plan);
  }
  return result;
}

}  // namespace

void TimeSeries::Validate() const {
  if (!(sample_period > 0.0) || !std::isfinite(sample_period)) {
    throw InvalidArgument("time series sample_period must be > 0");
  }
  if (samples.size() < 2) {
    throw InvalidArgument("time series needs at least 2 samples");
  }
}

double Spectrum::Energy() const {
  // Full two-sided sum: interior bins appear twice, DC and (even-length)
  // Nyquist once. |X_k| = mag_k * W / 2 for interior bins, mag_k * W at the
  // edges, with W the window sum.
  double sum = 0.0;
  const size_t last = magnitudes.size() - 1;
  for (size_t k = 0; k <= last; ++k) {
    const bool edge = k == 0 || (k == last && n_fft % 2 == 0);
    const double x = magnitudes[k] * window_sum * (edge ? 1.0 : 0.5);
    sum += (edge ? 1.0 : 2.0) * x * x;
  }
  return sum / static_cast<double>(n_fft);
}

Spectrum ComputeSpectrum(const TimeSeries& ts, const SpectrumOptions& opts) {
  ts.Validate();
  if (opts.zero_pad_factor < 1) {
    throw InvalidArgument("zero_pad_factor must be >= 1");
  }
  const size_t n = ts.samples.size();
  double mean =
      std::accumulate(ts.samples.begin(), ts.samples.end(), 0.0) / n;
  double residual = 0.0;
  for (double v : ts.samples) residual += v - mean;
  mean += residual / n;

  std::vector<double> w(n, 1.0);
  if (opts.window == Window::kHann) {
    for (size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / (n - 1));
    }
  }
  const size_t m = n * static_cast<size_t>(opts.zero_pad_factor);
  std::vector<double> buf(m, 0.0);
  double wsum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    buf[i] = (ts.samples[i] - mean) * w[i];
    wsum += w[i];
  }

  const auto dft = RealDft(buf);
  Spectrum spec;
  spec.n_samples = n;
  spec.n_fft = m;
  spec.window_sum = wsum;
  spec.bin_width = 1.0 / (static_cast<double>(m) * ts.sample_period);
  spec.freqs.resize(dft.size());
  spec.magnitudes.resize(dft.size());
  const size_t last = dft.size() - 1;
  for (size_t k = 0; k < dft.size(); ++k) {
    const bool edge = k == 0 || (k == last && m % 2 == 0);
    spec.freqs[k] = k * spec.bin_width;
    spec.magnitudes[k] = std::abs(dft[k]) * (edge ? 1.0 : 2.0) / wsum;
  }
  return spec;
}

Peak FindPeak(const Spectrum& spec, double f_lo, double f_hi) {
  const auto& mag = spec.magnitudes;
  if (mag.size() < 3) throw InvalidArgument("spectrum has fewer than 3 bins");
  const double f_max = spec.freqs.back();
  if (!(f_lo >= 0.0) || !(f_hi > f_lo) ||
      f_hi > f_max + 0.5 * spec.bin_width) {
    throw InvalidArgument("search band must lie within [0, Nyquist]");
  }
  const auto first = static_cast<size_t>(std::ceil(f_lo / spec.bin_width));
  const auto end = std::min(
      mag.size(), static_cast<size_t>(std::floor(f_hi / spec.bin_width)) + 1);
  if (first >= end) throw InvalidArgument("search band contains no bins");

  size_t k = first;
  for (size_t i = first; i < end; ++i) {
    if (mag[i] > mag[k]) k = i;
  }
  if (k == 0 || k + 1 >= mag.size() || mag[k] < mag[k - 1] ||
      mag[k] < mag[k + 1] || mag[k] <= 0.0) {
    throw NumericalError("no local maximum in search band");
  }

  const double a = mag[k - 1];
  const double b = mag[k];
  const double c = mag[k + 1];
  const double curvature = a - 2.0 * b + c;
  const double delta = curvature != 0.0 ? 0.5 * (a - c) / curvature : 0.0;

  Peak peak;
  peak.f_peak = (static_cast<double>(k) + delta) * spec.bin_width;
  peak.amplitude = b - 0.25 * (a - c) * delta;

  const double half = 0.5 * peak.amplitude;
  double left = 0.0;
  size_t j = k;
  while (j > 0 && mag[j - 1] >= half) --j;
  if (j == 0) {
    left = spec.freqs[0];
  } else {
    const double t = (mag[j] - half) / (mag[j] - mag[j - 1]);
    left = spec.freqs[j] - t * spec.bin_width;
  }
  double right = 0.0;
  j = k;
  while (j + 1 < mag.size() && mag[j + 1] >= half) ++j;
  if (j + 1 == mag.size()) {
    right = spec.freqs[j];
  } else {
    const double t = (mag[j] - half) / (mag[j] - mag[j + 1]);
    right = spec.freqs[j] + t * spec.bin_width;
  }
  peak.fwhm = right - left;
  return peak;
}

}  // namespace nvloop::signal
