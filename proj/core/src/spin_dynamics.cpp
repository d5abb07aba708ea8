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

#include <Eigen/Geometry>
#include <cmath>
#include <random>
#include <string>

#include "nvloop/errors.hpp"

namespace nvloop::spin {
namespace {

void Require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

// Rodrigues rotation of v about the unit vector k by angle.
Vec3 Rotate(const Vec3& v, const Vec3& k, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c));
}

Vec3 RotateZ(const Vec3& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {v.x() * c - v.y() * s, v.x() * s + v.y() * c, v.z()};
}

// Rotation with angular-velocity vector omega (rad/s) for dt seconds.
Vec3 Precess(const Vec3& v, const Vec3& omega, double dt) {
  const double rate = omega.norm();
  if (rate == 0.0 || dt == 0.0) return v;
  return Rotate(v, omega / rate, rate * dt);
}

class Evolver {
 public:
  Evolver(const ACSignal& signal, const NVConstants& constants,
          const PropagateOptions& opts)
      : signal_(signal),
        constants_(constants),
        substeps_(std::max(1, opts.pulse_substeps)),
        t_(opts.t_start) {}

  void Apply(const PulseEvent& ev, Vec3& bloch) {
    const double two_pi_gamma = 2.0 * kPi * constants_.gyromagnetic_ratio;
    switch (ev.kind) {
      case EventKind::kReadout:
        return;
      case EventKind::kFreeEvolution:
        bloch = RotateZ(bloch, two_pi_gamma * signal_.Integral(t_, t_ + ev.duration));
        Decay(bloch, ev.duration);
        t_ += ev.duration;
        return;
      case EventKind::kMwPulse:
        break;
    }
    const Vec3 drive(2.0 * kPi * ev.rabi_rate * std::cos(ev.phase_axis),
                     2.0 * kPi * ev.rabi_rate * std::sin(ev.phase_axis),
                     2.0 * kPi * ev.detuning);
    if (ev.duration == 0.0) {
      const Vec3 axis(std::cos(ev.phase_axis), std::sin(ev.phase_axis), 0.0);
      bloch = Rotate(bloch, axis, ev.ideal_angle);
      return;
    }
    if (signal_.amplitude == 0.0) {
      bloch = Precess(bloch, drive, ev.duration);
    } else {
      const double dt = ev.duration / substeps_;
      for (int i = 0; i < substeps_; ++i) {
        const double t0 = t_ + i * dt;
        const double mean_field = signal_.Integral(t0, t0 + dt) / dt;
        Vec3 omega = drive;
        omega.z() += two_pi_gamma * mean_field;
        bloch = Precess(bloch, omega, dt);
      }
    }
    Decay(bloch, ev.duration);
    t_ += ev.duration;
  }

 private:
  void Decay(Vec3& bloch, double dt) {
    if (!constants_.t2) {
      elapsed_ += dt;
      return;
    }
    const double t2 = *constants_.t2;
    const double p = constants_.t2_exponent;
    const double before = std::pow(elapsed_ / t2, p);
    elapsed_ += dt;
    const double after = std::pow(elapsed_ / t2, p);
    const double f = std::exp(before - after);
    bloch.x() *= f;
    bloch.y() *= f;
  }

  const ACSignal& signal_;
  const NVConstants& constants_;
  int substeps_;
  double t_;
  double elapsed_ = 0.0;
};

}  // namespace

void NVConstants::Validate() const {
  Require(zero_field_splitting > 0.0, "zero_field_splitting must be > 0");
  Require(gyromagnetic_ratio > 0.0, "gyromagnetic_ratio must be > 0");
  if (t2) Require(*t2 > 0.0, "t2 must be > 0");
  Require(t2_exponent > 0.0, "t2_exponent must be > 0");
}

EsrFrequencies ComputeEsrFrequencies(double b0, const NVConstants& c) {
  Require(b0 >= 0.0, "b0 must be >= 0");
  c.Validate();
  const double shift = c.gyromagnetic_ratio * b0;
  return {std::abs(c.zero_field_splitting - shift),
          c.zero_field_splitting + shift};
}

double RabiPopulation(double t, double f1, double detuning) {
  Require(f1 >= 0.0, "f1 must be >= 0");
  const double w2 = f1 * f1 + detuning * detuning;
  if (w2 == 0.0) return 0.0;
  const double s = std::sin(kPi * std::sqrt(w2) * t);
  return f1 * f1 / w2 * s * s;
}

std::vector<double> OdmrSpectrum(std::span<const double> drive_freqs,
                                 double f0, double f1, double pulse_duration,
                                 double contrast_depth) {
  Require(pulse_duration > 0.0, "pulse_duration must be > 0");
  Require(f1 >= 0.0, "f1 must be >= 0");
  std::vector<double> out;
  out.reserve(drive_freqs.size());
  for (double f : drive_freqs) {
    const double d = f - f0;
    const double w2 = f1 * f1 + d * d;
    double transfer = 0.0;
    if (w2 > 0.0) {
      // Mean of sin^2(pi W t) over [0, T].
      const double x = 2.0 * kPi * std::sqrt(w2) * pulse_duration;
      transfer = f1 * f1 / w2 * (0.5 - std::sin(x) / (2.0 * x));
    }
    out.push_back(1.0 - contrast_depth * transfer);
  }
  return out;
}

signal::TimeSeries EnsembleRabi(std::span<const double> f1_samples,
                                std::span<const double> times) {
  Require(!f1_samples.empty(), "f1_samples must be nonempty");
  Require(times.size() >= 2, "times needs at least 2 points");
  const double dt = times[1] - times[0];
  Require(dt > 0.0, "times must be increasing");
  for (size_t i = 1; i < times.size(); ++i) {
    Require(std::abs((times[i] - times[i - 1]) - dt) <= 1e-6 * dt,
            "times must be uniformly spaced");
  }
  signal::TimeSeries ts;
  ts.sample_period = dt;
  ts.t0 = times[0];
  ts.samples.resize(times.size());
  for (size_t i = 0; i < times.size(); ++i) {
    double sum = 0.0;
    for (double f1 : f1_samples) sum += RabiPopulation(times[i], f1, 0.0);
    ts.samples[i] = sum / f1_samples.size();
  }
  return ts;
}

PulseEvent PulseEvent::Pulse(double f1, double duration, double phase,
                             double detuning) {
  PulseEvent e;
  e.kind = EventKind::kMwPulse;
  e.rabi_rate = f1;
  e.duration = duration;
  e.phase_axis = phase;
  e.detuning = detuning;
  return e;
}

PulseEvent PulseEvent::IdealPulse(double angle, double phase) {
  PulseEvent e;
  e.kind = EventKind::kMwPulse;
  e.phase_axis = phase;
  e.ideal_angle = angle;
  return e;
}

PulseEvent PulseEvent::Free(double duration) {
  PulseEvent e;
  e.kind = EventKind::kFreeEvolution;
  e.duration = duration;
  return e;
}

PulseEvent PulseEvent::Readout() {
  PulseEvent e;
  e.kind = EventKind::kReadout;
  return e;
}

double PulseSequence::Duration() const {
  double t = 0.0;
  for (const auto& e : events) t += e.duration;
  return t;
}

int PulseSequence::PulseCount() const {
  int n = 0;
  for (const auto& e : events) n += e.kind == EventKind::kMwPulse;
  return n;
}

void PulseSequence::Validate() const {
  for (const auto& e : events) {
    Require(e.duration >= 0.0 && std::isfinite(e.duration),
            "event durations must be >= 0");
    if (e.kind == EventKind::kMwPulse) {
      Require(e.rabi_rate >= 0.0, "pulse rabi_rate must be >= 0");
    }
  }
}

PulseSequence MakeXy8(int n_repeats, double f_casr, double f1,
                      const Xy8Options& opts) {
  Require(n_repeats >= 1, "n_repeats must be >= 1");
  Require(f_casr > 0.0, "f_casr must be > 0");
  const bool finite = opts.shape == PulseShape::kFinite;
  Require(!finite || f1 > 0.0, "f1 must be > 0");

  const double tau = 1.0 / (2.0 * f_casr);
  const double t_pi = finite ? 1.0 / (2.0 * f1) : 0.0;
  if (finite && !(t_pi < tau)) {
    throw PulsesOverlap(
        "pulses overlap: pi pulse 1/(2 f1) must be shorter than tau = "
        "1/(2 f_casr); f1 must exceed f_casr");
  }

  auto pulse = [&](double angle, double phase) {
    if (!finite) return PulseEvent::IdealPulse(angle, phase);
    return PulseEvent::Pulse(f1, angle / (2.0 * kPi * f1), phase);
  };

  constexpr double kX = 0.0;
  constexpr double kY = kPi / 2.0;
  constexpr double kPattern[8] = {kX, kY, kX, kY, kY, kX, kY, kX};

  PulseSequence seq;
  if (opts.include_pi2) seq.events.push_back(pulse(kPi / 2.0, kX));
  const int n_pi = 8 * n_repeats;
  seq.events.push_back(PulseEvent::Free(0.5 * (tau - t_pi)));
  for (int i = 0; i < n_pi; ++i) {
    seq.events.push_back(pulse(kPi, kPattern[i % 8]));
    seq.events.push_back(
        PulseEvent::Free(i + 1 < n_pi ? tau - t_pi : 0.5 * (tau - t_pi)));
  }
  if (opts.include_pi2) {
    const double close =
        opts.convention == ReadoutConvention::kSin ? kY : kX;
    seq.events.push_back(pulse(kPi / 2.0, close));
  }
  seq.events.push_back(PulseEvent::Readout());
  return seq;
}

double ACSignal::At(double t) const {
  return amplitude * std::sin(2.0 * kPi * frequency * t + phase);
}

double ACSignal::Integral(double t0, double t1) const {
  if (amplitude == 0.0) return 0.0;
  if (frequency == 0.0) return amplitude * std::sin(phase) * (t1 - t0);
  const double w = 2.0 * kPi * frequency;
  return amplitude / w * (std::cos(w * t0 + phase) - std::cos(w * t1 + phase));
}

Trajectory Propagate(const TwoLevelState& state, const PulseSequence& seq,
                     const ACSignal& signal, const NVConstants& constants,
                     const PropagateOptions& opts) {
  seq.Validate();
  Trajectory traj;
  traj.states.reserve(seq.events.size());
  Evolver evolver(signal, constants, opts);
  Vec3 bloch = state.bloch;
  for (const auto& ev : seq.events) {
    evolver.Apply(ev, bloch);
    traj.states.push_back({bloch});
    if (ev.kind == EventKind::kReadout) traj.readouts.push_back(bloch.z());
  }
  return traj;
}

TwoLevelState PropagateFinal(const TwoLevelState& state,
                             const PulseSequence& seq, const ACSignal& signal,
                             const NVConstants& constants,
                             const PropagateOptions& opts) {
  Evolver evolver(signal, constants, opts);
  Vec3 bloch = state.bloch;
  for (const auto& ev : seq.events) evolver.Apply(ev, bloch);
  return {bloch};
}

void CasrParams::Validate() const {
  Require(total_time > 0.0, "casr.total_time must be > 0");
  Require(f_signal > 0.0, "casr.f_signal must be > 0");
  Require(signal_amplitude >= 0.0, "casr.signal_amplitude must be >= 0");
  Require(std::isfinite(signal_phase), "casr.signal_phase must be finite");
  Require(std::isfinite(generator_offset_ppm),
          "casr.generator_offset_ppm must be finite");
  Require(f_casr > 0.0, "casr.f_casr must be > 0");
  Require(n_repeats >= 1, "casr.n_repeats must be >= 1");
  Require(f1 > 0.0, "casr.f1 must be > 0");
  Require(readout.contrast_depth > 0.0 && readout.contrast_depth <= 1.0,
          "readout.contrast_depth must be in (0, 1]");
  Require(readout.noise_sigma >= 0.0, "readout.noise_sigma must be >= 0");
  Require(timing.post_sequence_delay >= 0.0 && timing.laser_duration >= 0.0 &&
              timing.pre_sequence_delay >= 0.0 && timing.readout_offset >= 0.0,
          "casr timing values must be >= 0");
  constants.Validate();
}

CasrResult CasrRun(const CasrParams& params) {
  params.Validate();
  CasrResult result;
  result.sequence =
      MakeXy8(params.n_repeats, params.f_casr, params.f1,
              {true, params.shape, params.readout.convention});

  const double seq_duration = result.sequence.Duration();
  double period = seq_duration + params.timing.post_sequence_delay +
                  params.timing.laser_duration +
                  params.timing.pre_sequence_delay;
  if (params.timing.synchronize) {
    period = std::ceil(period * params.f_casr - 1e-6) / params.f_casr;
  }
  result.block_period = period;

  const auto n_blocks =
      static_cast<size_t>(std::floor(params.total_time / period + 1e-9));
  if (n_blocks < 2) {
    throw InvalidArgument("casr.total_time must span at least two blocks");
  }

  ACSignal signal;
  signal.amplitude = params.signal_amplitude;
  signal.frequency =
      params.f_signal * (1.0 + 1e-6 * params.generator_offset_ppm);

  // Signal phase advance per block, as a fraction of a cycle.
  const double cycles = signal.frequency * period;
  const double frac = cycles - std::floor(cycles);

  std::mt19937_64 rng(params.readout.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  result.pl.sample_period = period;
  result.pl.t0 = seq_duration + params.timing.post_sequence_delay +
                 params.timing.readout_offset;
  result.pl.samples.resize(n_blocks);
  for (size_t k = 0; k < n_blocks; ++k) {
    const double block_cycles = std::fmod(static_cast<double>(k) * frac, 1.0);
    signal.phase = params.signal_phase + 2.0 * kPi * block_cycles;
    const TwoLevelState final_state =
        PropagateFinal(TwoLevelState::Ground(), result.sequence, signal,
                       params.constants);
    double pl = PlContrast(final_state.bloch.z(),
                           params.readout.contrast_depth);
    if (params.readout.noise_sigma > 0.0) {
      pl += params.readout.noise_sigma * noise(rng);
    }
    result.pl.samples[k] = pl;
  }
  return result;
}

}  // namespace nvloop::spin
