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

#include "nvloop/spin_dynamics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "nvloop/errors.hpp"
#include "nvloop/signal_analysis.hpp"

namespace nvloop::spin {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGamma = 2.8024e10;

TEST(Esr, ReferenceBiasFields) {
  const auto a = ComputeEsrFrequencies(116e-4);
  EXPECT_NEAR(a.f_minus, 2.55e9, 10e6);
  const auto b = ComputeEsrFrequencies(526e-4);
  EXPECT_NEAR(b.f_minus, 1.40e9, 10e6);
  EXPECT_NEAR(b.f_plus, 4.34e9, 10e6);
  const auto c = ComputeEsrFrequencies(0.0);
  EXPECT_DOUBLE_EQ(c.f_minus, 2.87e9);
  EXPECT_DOUBLE_EQ(c.f_plus, 2.87e9);
  EXPECT_THROW(ComputeEsrFrequencies(-1e-4), InvalidArgument);
}

TEST(Esr, LinearityAndKink) {
  const double kink = 2.87e9 / kGamma;
  EXPECT_NEAR(kink * 1e4, 1024.1, 0.1);
  for (double b : {0.0, 0.01, 0.05, 0.2}) {
    EXPECT_NEAR(ComputeEsrFrequencies(b).f_plus - 2.87e9, kGamma * b, 1e-6 * kGamma * b + 1e-3);
  }
  EXPECT_NEAR(ComputeEsrFrequencies(kink).f_minus, 0.0, 1.0);
  const double below = ComputeEsrFrequencies(kink - 1e-3).f_minus;
  const double above = ComputeEsrFrequencies(kink + 1e-3).f_minus;
  EXPECT_NEAR(below, above, 1.0);
  EXPECT_GT(ComputeEsrFrequencies(kink + 2e-3).f_minus, above);
}

TEST(Rabi, Examples) {
  const double f1 = 10e6;
  EXPECT_NEAR(RabiPopulation(1.0 / (2 * f1), f1, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(RabiPopulation(1.0 / (4 * f1), f1, 0.0), 0.5, 1e-15);
  // Detuned by f1: amplitude 1/2, generalized frequency sqrt(2) f1.
  const double fg = std::sqrt(2.0) * f1;
  EXPECT_NEAR(RabiPopulation(1.0 / (2 * fg), f1, f1), 0.5, 1e-15);
  EXPECT_NEAR(RabiPopulation(1.0 / fg, f1, f1), 0.0, 1e-15);
}

TEST(Odmr, LongPulseLimits) {
  const double f0 = 2.55e9, f1 = 1e6, t = 1e-3, c = 0.03;
  const std::vector<double> freqs = {f0, f0 + 100 * f1, f0 - f1, f0 + f1};
  const auto pl = OdmrSpectrum(freqs, f0, f1, t, c);
  EXPECT_NEAR(pl[0], 1.0 - c / 2, 1e-5);
  EXPECT_NEAR(pl[1], 1.0, 1e-5);
  // Half depth at |delta| = f1.
  EXPECT_NEAR(pl[2], 1.0 - c / 4, 1e-5);
  EXPECT_NEAR(pl[3], 1.0 - c / 4, 1e-5);
}

TEST(Odmr, FwhmIsTwiceRabiFrequency) {
  const double f0 = 2.55e9, f1 = 2e6, t = 1e-3, c = 0.03;
  // Half-depth crossing on each side, by bisection on the spectrum itself.
  auto depth = [&](double f) {
    const double x[] = {f};
    return 1.0 - OdmrSpectrum(x, f0, f1, t, c)[0];
  };
  const double half = depth(f0) / 2;
  auto cross = [&](double lo, double hi) {
    for (int i = 0; i < 100; ++i) {
      const double mid = 0.5 * (lo + hi);
      ((depth(mid) > half) == (depth(lo) > half) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double right = cross(f0, f0 + 10 * f1);
  const double left = cross(f0, f0 - 10 * f1);
  EXPECT_NEAR(right - left, 2 * f1, 1e-3 * f1);
  EXPECT_THROW(OdmrSpectrum(std::vector<double>{f0}, f0, f1, 0.0, c), InvalidArgument);
}

std::vector<double> UniformTimes(int n, double dt) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = i * dt;
  return t;
}

TEST(EnsembleRabi, SingleSampleIsUndamped) {
  const double f1 = 10e6;
  const auto times = UniformTimes(4000, 2.5e-9);
  const std::vector<double> s = {f1};
  const auto ts = EnsembleRabi(s, times);
  ASSERT_EQ(ts.samples.size(), times.size());
  EXPECT_DOUBLE_EQ(ts.sample_period, 2.5e-9);
  for (size_t i = 0; i < times.size(); i += 37) {
    EXPECT_NEAR(ts.samples[i], RabiPopulation(times[i], f1, 0.0), 1e-15);
  }
  const auto spec = signal::ComputeSpectrum(ts, {signal::Window::kHann, 4});
  const auto peak = signal::FindPeak(spec, 1e6, 50e6);
  EXPECT_NEAR(peak.f_peak, f1, spec.bin_width / 4);
}

TEST(EnsembleRabi, TwoToneBeat) {
  const double f1 = 10e6;
  const auto times = UniformTimes(3000, 1e-9);
  const std::vector<double> s = {f1, 1.1 * f1};
  const auto ts = EnsembleRabi(s, times);
  for (size_t i = 0; i < times.size(); i += 11) {
    const double t = times[i];
    const double expected = 0.5 - 0.5 * std::cos(2 * kPi * 1.05 * f1 * t) *
                                      std::cos(2 * kPi * 0.05 * f1 * t);
    EXPECT_NEAR(ts.samples[i], expected, 1e-12);
  }
  // The envelope |cos(2 pi 0.05 f1 t)| repeats after 1 / (0.1 f1).
  const double period = 1.0 / (0.1 * f1);
  EXPECT_NEAR(std::abs(std::cos(2 * kPi * 0.05 * f1 * period)), 1.0, 1e-12);
}

// Standard normal quantile by bisection on the CDF.
double NormalQuantile(double p) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double SpreadFwhm(double rel_sigma) {
  const double f1 = 10e6;
  const int n = 400;
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) s[i] = f1 * (1.0 + rel_sigma * NormalQuantile((i + 0.5) / n));
  const auto ts = EnsembleRabi(s, UniformTimes(4000, 2.5e-9));
  const auto spec = signal::ComputeSpectrum(ts, {signal::Window::kRectangular, 8});
  return signal::FindPeak(spec, 5e6, 15e6).fwhm;
}

TEST(EnsembleRabi, WiderSpreadBroadensSpectrum) {
  EXPECT_GT(SpreadFwhm(0.063), SpreadFwhm(0.015));
}

TEST(EnsembleRabi, Preconditions) {
  const std::vector<double> none;
  const std::vector<double> one = {1e6};
  EXPECT_THROW(EnsembleRabi(none, UniformTimes(10, 1e-9)), InvalidArgument);
  const std::vector<double> uneven = {0.0, 1e-9, 3e-9};
  EXPECT_THROW(EnsembleRabi(one, uneven), InvalidArgument);
}

TEST(Xy8, ReferenceParameters) {
  const auto seq = MakeXy8(6, 30e6, 136.3e6);
  EXPECT_EQ(seq.PulseCount(), 50);  // 48 pi + 2 pi/2
  std::vector<const PulseEvent*> pis;
  for (const auto& e : seq.events) {
    if (e.kind == EventKind::kMwPulse && std::abs(e.duration * 2 * e.rabi_rate - 1.0) < 1e-12) {
      pis.push_back(&e);
    }
  }
  ASSERT_EQ(pis.size(), 48u);
  EXPECT_NEAR(pis[0]->duration, 3.67e-9, 0.005e-9);
  EXPECT_EQ(seq.events.back().kind, EventKind::kReadout);
}

TEST(Xy8, PulseCentersAndPhasePattern) {
  const double f_casr = 30e6, f1 = 136.3e6, tau = 1.0 / (2 * f_casr);
  const auto seq = MakeXy8(2, f_casr, f1, {false, PulseShape::kFinite, ReadoutConvention::kSin});
  std::vector<double> centers, phases;
  double t = 0.0;
  for (const auto& e : seq.events) {
    if (e.kind == EventKind::kMwPulse) {
      centers.push_back(t + e.duration / 2);
      phases.push_back(e.phase_axis);
    }
    t += e.duration;
  }
  ASSERT_EQ(centers.size(), 16u);
  EXPECT_NEAR(centers.front(), tau / 2, 1e-18);
  EXPECT_NEAR(seq.Duration() - centers.back(), tau / 2, 1e-18);
  for (size_t i = 1; i < centers.size(); ++i) {
    EXPECT_NEAR(centers[i] - centers[i - 1], tau, 1e-18);
  }
  const double x = 0.0, y = kPi / 2;
  const double pattern[8] = {x, y, x, y, y, x, y, x};
  for (size_t i = 0; i < phases.size(); ++i) EXPECT_EQ(phases[i], pattern[i % 8]);
  EXPECT_NEAR(seq.Duration(), 16 * tau, 1e-18);
}

TEST(Xy8, OverlapBound) {
  EXPECT_NO_THROW(MakeXy8(1, 30e6, 50e6));
  EXPECT_THROW(MakeXy8(1, 30e6, 25e6), PulsesOverlap);
  EXPECT_THROW(MakeXy8(1, 30e6, 25e6), InvalidArgument);
  EXPECT_NO_THROW(MakeXy8(1, 30e6, 1e6, {true, PulseShape::kInstantaneous, ReadoutConvention::kSin}));
  EXPECT_THROW(MakeXy8(0, 30e6, 136e6), InvalidArgument);
}

TEST(Xy8, SingleRepeat) {
  const auto seq = MakeXy8(1, 30e6, 136.3e6, {false, PulseShape::kFinite, ReadoutConvention::kSin});
  EXPECT_EQ(seq.PulseCount(), 8);
}

TEST(Propagate, HahnEchoRecovers) {
  const double f1 = 50e6, tau = 200e-9;
  PulseSequence seq;
  seq.events = {PulseEvent::Pulse(f1, 1 / (4 * f1), 0), PulseEvent::Free(tau),
                PulseEvent::Pulse(f1, 1 / (2 * f1), 0), PulseEvent::Free(tau),
                PulseEvent::Pulse(f1, 1 / (4 * f1), 0), PulseEvent::Readout()};
  const auto traj = Propagate(TwoLevelState::Ground(), seq, ACSignal{}, NVConstants{});
  ASSERT_EQ(traj.readouts.size(), 1u);
  // pi/2 - pi - pi/2 about one axis totals 2 pi.
  EXPECT_NEAR(traj.readouts[0], -1.0, 1e-12);
  EXPECT_EQ(traj.states.size(), seq.events.size());
}

TEST(Propagate, ZeroAmplitudeMatchesReference) {
  const auto seq = MakeXy8(6, 30e6, 136.3e6);
  ACSignal zero{0.0, 29.992e6, 0.3};
  const auto a = PropagateFinal(TwoLevelState::Ground(), seq, zero, NVConstants{});
  const auto b = PropagateFinal(TwoLevelState::Ground(), seq, ACSignal{}, NVConstants{});
  EXPECT_NEAR(a.bloch.z(), b.bloch.z(), 1e-12);
}

TEST(Propagate, Xy8IdentityWithoutSignal) {
  const auto seq = MakeXy8(6, 30e6, 0.0, {false, PulseShape::kInstantaneous, ReadoutConvention::kSin});
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 10; ++i) {
    TwoLevelState s;
    s.bloch = Vec3(u(rng), u(rng), u(rng)).normalized();
    const auto out = PropagateFinal(s, seq, ACSignal{}, NVConstants{});
    EXPECT_NEAR(out.bloch.z(), s.bloch.z(), 1e-9);
  }
}

TEST(Propagate, DetunedPulseMatchesRabiFormula) {
  const double f1 = 20e6;
  for (double detuning : {0.0, 5e6, 20e6, -13e6}) {
    for (double t : {3e-9, 17e-9, 41e-9, 100e-9}) {
      PulseSequence seq;
      seq.events = {PulseEvent::Pulse(f1, t, 0.7, detuning)};
      const auto out = PropagateFinal(TwoLevelState::Ground(), seq, ACSignal{}, NVConstants{});
      EXPECT_NEAR(out.Population(), RabiPopulation(t, f1, detuning), 1e-6);
    }
  }
}

TEST(Propagate, NormPreservation) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> f(1e6, 200e6), d(0, 50e-9), ph(0, 2 * kPi);
  PulseSequence seq;
  for (int i = 0; i < 10000; ++i) {
    seq.events.push_back(i % 2 ? PulseEvent::Pulse(f(rng), d(rng), ph(rng), f(rng) / 10)
                               : PulseEvent::Free(d(rng)));
  }
  const ACSignal sig{1e-5, 29.9e6, 0.2};
  const auto out = PropagateFinal(TwoLevelState::Ground(), seq, sig, NVConstants{});
  EXPECT_NEAR(out.bloch.norm(), 1.0, 1e-9);
}

TEST(Propagate, CoherenceEnvelope) {
  NVConstants c;
  c.t2 = 7.1e-6;
  PulseSequence seq;
  seq.events = {PulseEvent::IdealPulse(kPi / 2, 0), PulseEvent::Free(7.1e-6)};
  const auto out = PropagateFinal(TwoLevelState::Ground(), seq, ACSignal{}, c);
  EXPECT_NEAR(std::hypot(out.bloch.x(), out.bloch.y()), std::exp(-1.0), 1e-12);
  c.t2_exponent = 2.0;
  seq.events[1] = PulseEvent::Free(0.5 * 7.1e-6);
  const auto out2 = PropagateFinal(TwoLevelState::Ground(), seq, ACSignal{}, c);
  EXPECT_NEAR(std::hypot(out2.bloch.x(), out2.bloch.y()), std::exp(-0.25), 1e-12);
}

// Accumulated phase 2 pi gamma int s(t) b(t) dt with the toggling function
// flipping sign at each pi-pulse center, by composite Simpson integration.
double ToggledPhase(const ACSignal& sig, int n_pi, double tau) {
  // Interval edges: window start, each pulse center, window end.
  std::vector<double> edges = {0.0};
  for (int k = 0; k < n_pi; ++k) edges.push_back(tau / 2 + k * tau);
  edges.push_back(n_pi * tau);
  const int steps = 2000;
  double total = 0.0;
  for (size_t k = 0; k + 1 < edges.size(); ++k) {
    const double a = edges[k];
    const double h = (edges[k + 1] - a) / steps;
    double sum = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      sum += w * sig.At(a + i * h);
    }
    total += (k % 2 == 0 ? 1.0 : -1.0) * sum * h / 3;
  }
  return 2 * kPi * kGamma * total;
}

TEST(Propagate, Xy8PhaseMatchesToggledIntegral) {
  const double f_casr = 30e6, tau = 1 / (2 * f_casr);
  const auto sin_seq = MakeXy8(6, f_casr, 0.0, {true, PulseShape::kInstantaneous, ReadoutConvention::kSin});
  const auto cos_seq = MakeXy8(6, f_casr, 0.0, {true, PulseShape::kInstantaneous, ReadoutConvention::kCos});
  double sign = 0.0;
  double best = 0.0, best_phase = 0.0;
  for (double phase = 0.0; phase < 2 * kPi; phase += kPi / 8) {
    const ACSignal sig{1e-5, f_casr, phase};
    const double phi = ToggledPhase(sig, 48, tau);
    const double zs = Propagate(TwoLevelState::Ground(), sin_seq, sig, NVConstants{}).readouts.at(0);
    const double zc = Propagate(TwoLevelState::Ground(), cos_seq, sig, NVConstants{}).readouts.at(0);
    if (sign == 0.0 && std::abs(std::sin(phi)) > 0.1) sign = zs / std::sin(phi) > 0 ? 1 : -1;
    EXPECT_NEAR(zs, sign * std::sin(phi), 1e-6) << phase;
    EXPECT_NEAR(std::abs(zc), std::abs(std::cos(phi)), 1e-6) << phase;
    if (std::abs(phi) > best) {
      best = std::abs(phi);
      best_phase = phase;
    }
  }
  // Maximal response for the sinusoid aligned with the toggling function,
  // phase (2/pi) 2 pi gamma B T.
  const double t_total = 48 * tau;
  EXPECT_NEAR(best, 2 / kPi * 2 * kPi * kGamma * 1e-5 * t_total, 1e-6 * best);
  EXPECT_NEAR(std::cos(best_phase), 0.0, 1e-12);
}

TEST(Propagate, FiniteXy8ApproachesIdealForFastPulses) {
  const double f_casr = 30e6;
  const ACSignal sig{3e-6, f_casr, kPi / 2};
  const auto ideal = MakeXy8(6, f_casr, 0.0, {true, PulseShape::kInstantaneous, ReadoutConvention::kSin});
  const double z_ideal = PropagateFinal(TwoLevelState::Ground(), ideal, sig, NVConstants{}).bloch.z();
  double prev = 1.0;
  for (double f1 : {200e6, 1e9, 5e9}) {
    const auto fin = MakeXy8(6, f_casr, f1);
    const double z = PropagateFinal(TwoLevelState::Ground(), fin, sig, NVConstants{}).bloch.z();
    const double err = std::abs(z - z_ideal);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-2 * std::abs(z_ideal));
}

CasrParams ShortCasr(double f_signal, double amplitude, PulseShape shape) {
  CasrParams p;
  p.total_time = 0.05;
  p.f_signal = f_signal;
  p.signal_amplitude = amplitude;
  p.shape = shape;
  return p;
}

double PeakAmplitude(const CasrResult& r, double lo, double hi) {
  const auto spec = signal::ComputeSpectrum(r.pl, {});
  return signal::FindPeak(spec, lo, hi).amplitude;
}

TEST(Casr, BlockPeriod) {
  const auto r = CasrRun(ShortCasr(29.992e6, 1e-6, PulseShape::kFinite));
  // 48 tau + two pi/2 pulses + 23 us, rounded up to a multiple of 1/f_casr.
  EXPECT_NEAR(r.block_period, 715.0 / 30e6, 1e-15);
  EXPECT_NEAR(r.block_period * 30e6, std::round(r.block_period * 30e6), 1e-6);
  EXPECT_EQ(r.pl.samples.size(), static_cast<size_t>(std::floor(0.05 / r.block_period)));
}

TEST(Casr, DownConvertedPeak) {
  const auto r = CasrRun(ShortCasr(29.992e6, 1e-6, PulseShape::kFinite));
  const auto spec = signal::ComputeSpectrum(r.pl, {});
  const auto peak = signal::FindPeak(spec, 1e3, 20e3);
  EXPECT_NEAR(peak.f_peak, 8000.0, 1.0 / (r.pl.samples.size() * r.block_period));
}

TEST(Casr, MatchedFrequencyGivesNoTone) {
  const auto r = CasrRun(ShortCasr(30e6, 1e-6, PulseShape::kFinite));
  const auto spec = signal::ComputeSpectrum(r.pl, {});
  double max_ac = 0.0;
  for (size_t i = 1; i < spec.magnitudes.size(); ++i) max_ac = std::max(max_ac, spec.magnitudes[i]);
  EXPECT_LT(max_ac, 1e-12);
}

TEST(Casr, SmallSignalLinearity) {
  const auto a = CasrRun(ShortCasr(29.992e6, 1e-7, PulseShape::kFinite));
  const auto b = CasrRun(ShortCasr(29.992e6, 2e-7, PulseShape::kFinite));
  const double ratio = PeakAmplitude(b, 1e3, 20e3) / PeakAmplitude(a, 1e3, 20e3);
  EXPECT_NEAR(ratio, 2.0, 0.1);
}

TEST(Casr, DownConversionExactness) {
  for (double offset : {1e3, 8e3, 23e3}) {
    CasrParams p = ShortCasr(30e6 - offset, 1e-6, PulseShape::kInstantaneous);
    p.timing.post_sequence_delay = 0.5e-6;
    p.timing.laser_duration = 5e-6;
    p.timing.pre_sequence_delay = 0.5e-6;
    p.timing.readout_offset = 0.3e-6;
    const auto r = CasrRun(p);
    const double bin = 1.0 / (r.pl.samples.size() * r.block_period);
    const auto spec = signal::ComputeSpectrum(r.pl, {});
    const auto peak = signal::FindPeak(spec, 2 * bin, 0.5 / r.block_period);
    EXPECT_NEAR(peak.f_peak, offset, bin) << offset;
  }
}

TEST(Casr, FinitePulseDegradationIsMonotone) {
  std::vector<double> amps;
  for (double f1 : {1e9, 300e6, 136.3e6, 60e6, 35e6}) {
    CasrParams p = ShortCasr(29.992e6, 1e-6, PulseShape::kFinite);
    p.total_time = 0.02;
    p.f1 = f1;
    amps.push_back(PeakAmplitude(CasrRun(p), 1e3, 20e3));
  }
  for (size_t i = 1; i < amps.size(); ++i) EXPECT_LE(amps[i], amps[i - 1] * (1 + 1e-9)) << i;
}

TEST(Casr, SeededNoiseIsReproducible) {
  CasrParams p = ShortCasr(29.992e6, 1e-6, PulseShape::kFinite);
  p.total_time = 0.002;
  p.readout.noise_sigma = 1e-3;
  p.readout.seed = 42;
  const auto a = CasrRun(p);
  const auto b = CasrRun(p);
  EXPECT_EQ(a.pl.samples, b.pl.samples);
  p.readout.seed = 43;
  const auto c = CasrRun(p);
  EXPECT_NE(a.pl.samples, c.pl.samples);
}

TEST(Casr, Preconditions) {
  CasrParams p;
  p.total_time = 10e-6;
  EXPECT_THROW(CasrRun(p), InvalidArgument);
  p = CasrParams{};
  p.f1 = 20e6;
  EXPECT_THROW(CasrRun(p), PulsesOverlap);
  p = CasrParams{};
  p.signal_amplitude = -1.0;
  EXPECT_THROW(CasrRun(p), InvalidArgument);
}

TEST(Readout, ContrastMapping) {
  EXPECT_DOUBLE_EQ(PlContrast(-1.0, 0.03), 1.0);
  EXPECT_DOUBLE_EQ(PlContrast(1.0, 0.03), 0.97);
  EXPECT_DOUBLE_EQ(PlContrast(0.0, 0.03), 0.985);
}

}  // namespace
}  // namespace nvloop::spin
