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

#ifndef NVLOOP_SIGNAL_ANALYSIS_HPP_
#define NVLOOP_SIGNAL_ANALYSIS_HPP_

#include <vector>

namespace nvloop::signal {

// Uniformly sampled real signal.
struct TimeSeries {
  std::vector<double> samples;
  double sample_period = 1.0;  // s
  double t0 = 0.0;             // time of samples[0]

  void Validate() const;
  double TimeAt(size_t i) const { return t0 + sample_period * i; }
};

enum class Window { kRectangular, kHann };

struct SpectrumOptions {
  Window window = Window::kRectangular;
  // The DFT length is the sample count times this factor. Padding only
  // interpolates the spectrum; resolution stays 1 / duration.
  int zero_pad_factor = 4;
};

// One-sided magnitude spectrum, bins 0 .. n_fft / 2. Magnitudes are scaled
// so that a sinusoid of amplitude A centered on a bin reads A.
struct Spectrum {
  std::vector<double> freqs;
  std::vector<double> magnitudes;
  double bin_width = 0.0;  // 1 / (n_fft * sample_period)
  size_t n_samples = 0;
  size_t n_fft = 0;
  double window_sum = 0.0;  // sum of window weights

  // sum_n (w_n x_n)^2 of the windowed, mean-removed input, recovered from
  // the magnitudes through Parseval's identity.
  double Energy() const;
};

struct Peak {
  double f_peak = 0.0;
  double amplitude = 0.0;
  double fwhm = 0.0;
};

// Mean-removed, windowed DFT magnitude.
Spectrum ComputeSpectrum(const TimeSeries& ts, const SpectrumOptions& opts = {});

// Largest bin in [f_lo, f_hi], refined by a 3-point parabola; FWHM from
// linear interpolation of the half-maximum crossings. Throws
// InvalidArgument for an empty band and NumericalError when the band
// maximum is not a local maximum of the spectrum.
Peak FindPeak(const Spectrum& spec, double f_lo, double f_hi);

}  // namespace nvloop::signal

#endif  // NVLOOP_SIGNAL_ANALYSIS_HPP_
