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

// Two-level NV spin model in the rotating frame of the microwave drive.
//
// Bloch convention: bloch_z = -1 is the optically bright m_s = 0 state, so
// the transferred population is (1 + bloch_z) / 2. Microwave pulses rotate
// about (f1 cos(phase), f1 sin(phase), detuning); the NV-axis projection of
// an AC test field b(t) adds a z rotation at angular rate 2 pi gamma b(t).

#ifndef NVLOOP_SPIN_DYNAMICS_HPP_
#define NVLOOP_SPIN_DYNAMICS_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nvloop/constants.hpp"
#include "nvloop/signal_analysis.hpp"

namespace nvloop::spin {

using Vec3 = Eigen::Vector3d;

struct NVConstants {
  double zero_field_splitting = kZeroFieldSplitting;  // Hz
  double gyromagnetic_ratio = kGyromagneticRatio;     // Hz/T
  std::optional<double> t2;  // coherence envelope time constant, s
  double t2_exponent = 1.0;  // exp(-(t / t2)^p)

  void Validate() const;
};

struct EsrFrequencies {
  double f_minus = 0.0;  // |D - gamma B0|, m_s = 0 <-> -1
  double f_plus = 0.0;   // D + gamma B0,   m_s = 0 <-> +1
};

EsrFrequencies ComputeEsrFrequencies(double b0, const NVConstants& c = {});

// Population transferred out of m_s = 0 after a square pulse of length t:
// f1^2 / (f1^2 + d^2) * sin^2(pi sqrt(f1^2 + d^2) t).
double RabiPopulation(double t, double f1, double detuning);

// PL contrast 1 - depth * <RabiPopulation> averaged over the pulse.
std::vector<double> OdmrSpectrum(std::span<const double> drive_freqs,
                                 double f0, double f1, double pulse_duration,
                                 double contrast_depth);

// Mean resonant Rabi population over an inhomogeneous set of f1 values.
signal::TimeSeries EnsembleRabi(std::span<const double> f1_samples,
                                std::span<const double> times);

struct TwoLevelState {
  Vec3 bloch{0.0, 0.0, -1.0};

  static TwoLevelState Ground() { return {}; }
  double Population() const { return 0.5 * (1.0 + bloch.z()); }
};

enum class EventKind { kMwPulse, kFreeEvolution, kReadout };

struct PulseEvent {
  EventKind kind = EventKind::kFreeEvolution;
  double duration = 0.0;    // s
  double rabi_rate = 0.0;   // f1, Hz
  double phase_axis = 0.0;  // rad; 0 = x, pi/2 = y
  double detuning = 0.0;    // Hz
  // Rotation angle of a zero-duration (ideal) pulse; finite pulses rotate
  // by 2 pi sqrt(f1^2 + detuning^2) duration.
  double ideal_angle = 0.0;

  static PulseEvent Pulse(double f1, double duration, double phase,
                          double detuning = 0.0);
  static PulseEvent IdealPulse(double angle, double phase);
  static PulseEvent Free(double duration);
  static PulseEvent Readout();
};

struct PulseSequence {
  std::vector<PulseEvent> events;

  double Duration() const;
  int PulseCount() const;
  void Validate() const;
};

enum class PulseShape { kFinite, kInstantaneous };

// Phase of the closing pi/2 pulse. kSin closes about y, making the readout
// linear in the accumulated phase; kCos closes about x.
enum class ReadoutConvention { kSin, kCos };

struct Xy8Options {
  bool include_pi2 = true;
  PulseShape shape = PulseShape::kFinite;
  ReadoutConvention convention = ReadoutConvention::kSin;
};

// XY8-N: 8 n pi pulses in X-Y-X-Y-Y-X-Y-X order, centers tau = 1/(2 f_casr)
// apart, first and last center tau/2 from the sensing window edges, and a
// closing readout marker. Finite pi pulses last 1/(2 f1); throws
// PulsesOverlap when that is not shorter than tau.
PulseSequence MakeXy8(int n_repeats, double f_casr, double f1,
                      const Xy8Options& opts = {});

// NV-axis projection of the test field: amplitude * sin(2 pi f t + phase).
struct ACSignal {
  double amplitude = 0.0;  // T
  double frequency = 0.0;  // Hz
  double phase = 0.0;

  double At(double t) const;
  // Integral of the field over [t0, t1].
  double Integral(double t0, double t1) const;
};

struct PropagateOptions {
  double t_start = 0.0;  // absolute time of the first event (signal clock)
  // Splitting steps per finite pulse when a signal is present.
  int pulse_substeps = 8;
};

struct Trajectory {
  std::vector<TwoLevelState> states;  // after each event
  std::vector<double> readouts;       // bloch_z at each readout marker
};

Trajectory Propagate(const TwoLevelState& state, const PulseSequence& seq,
                     const ACSignal& signal, const NVConstants& constants,
                     const PropagateOptions& opts = {});

// Final state only; same arithmetic as Propagate.
TwoLevelState PropagateFinal(const TwoLevelState& state,
                             const PulseSequence& seq, const ACSignal& signal,
                             const NVConstants& constants,
                             const PropagateOptions& opts = {});

struct ReadoutModel {
  double contrast_depth = 0.03;
  double noise_sigma = 0.0;  // additive white noise on each PL sample
  std::uint64_t seed = 0;
  ReadoutConvention convention = ReadoutConvention::kSin;
};

// PL contrast of a readout: 1 - depth * (1 + bloch_z) / 2.
inline double PlContrast(double bloch_z, double contrast_depth) {
  return 1.0 - contrast_depth * 0.5 * (1.0 + bloch_z);
}

// Dead time between the end of one decoupling block and the start of the
// next: settle, optical readout/re-initialization, and re-arm.
struct CasrTiming {
  double post_sequence_delay = 2e-6;
  double laser_duration = 20e-6;
  double pre_sequence_delay = 1e-6;
  double readout_offset = 1.2e-6;  // readout start after laser turn-on
  // Stretch the block period to a whole number of 1/f_casr periods.
  bool synchronize = true;
};

struct CasrParams {
  double total_time = 1.0;
  double f_signal = 29.992e6;
  double signal_amplitude = 1e-6;  // T along the NV axis
  double signal_phase = 0.0;
  double generator_offset_ppm = 0.0;
  double f_casr = 30e6;
  int n_repeats = 6;
  double f1 = 136.3e6;
  PulseShape shape = PulseShape::kFinite;
  ReadoutModel readout;
  CasrTiming timing;
  NVConstants constants;

  void Validate() const;
};

struct CasrResult {
  signal::TimeSeries pl;  // one PL contrast sample per block
  double block_period = 0.0;
  PulseSequence sequence;
};

// Back-to-back [XY8-N + readout + dead time] blocks for total_time.
CasrResult CasrRun(const CasrParams& params);

}  // namespace nvloop::spin

#endif  // NVLOOP_SPIN_DYNAMICS_HPP_
