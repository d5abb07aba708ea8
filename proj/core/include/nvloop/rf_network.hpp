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

// Lumped/transmission-line model of the loop drive chain: source, blocking
// capacitor, fixed line, open-terminated phase shifter (or a 50-ohm
// termination), loop inductance and an optional parasitic shunt.
//
// All quantities are SI: ohms, henries, farads, watts, radians, rad/s.

#ifndef NVLOOP_RF_NETWORK_HPP_
#define NVLOOP_RF_NETWORK_HPP_

#include <complex>
#include <vector>

namespace nvloop::rf {

using Impedance = std::complex<double>;

// Termination at the far end of a line: either an open circuit or a finite
// impedance.
class Load {
 public:
  static Load Open() { return Load(true, {}); }
  static Load Of(Impedance z) { return Load(false, z); }

  bool is_open() const { return open_; }
  Impedance impedance() const { return z_; }

 private:
  Load(bool open, Impedance z) : open_(open), z_(z) {}
  bool open_;
  Impedance z_;
};

enum class Termination {
  kOpenPhaseShifter,  // line 2 + open phase shifter, tunable
  kFixed50Ohm,        // line 2 terminated in 50 ohms, no tuning
};

struct DriveChain {
  double source_impedance = 50.0;  // real, ohms
  double line_impedance = 50.0;    // characteristic impedance of all lines
  double available_power = 1.0;    // W, at the source
  double line2_phase = 0.0;        // fixed electrical delay of line 2, rad
  double blocking_capacitance = 0.5e-12;  // +inf models a short
  double loop_inductance = 5.7e-9;
  double parasitic_shunt_capacitance = 0.0;
  double line_loss_db = 0.0;  // per segment: line 1, line 2, phase shifter
  Termination termination = Termination::kOpenPhaseShifter;

  // Throws InvalidArgument naming the first offending field.
  void Validate() const;
};

// Input impedance of a line of characteristic impedance `z0`, electrical
// length `electrical_phase` and attenuation `loss_db`, terminated in `load`.
// Throws ImpedancePole for a lossless open line whose length is a multiple
// of pi.
Impedance LineTransform(const Load& load, double z0, double electrical_phase,
                        double loss_db);

// Impedance presented by line 2 + open phase shifter at setting `phi`.
// Lossless: -i Z0 cot(phi + phi0).
Impedance Z1(double phi, const DriveChain& chain);

// Z1 in series with the blocking capacitor.
Impedance Z2(double phi, double omega, const DriveChain& chain);

// Impedance seen by the source. In kFixed50Ohm mode `phi` is ignored.
Impedance Zin(double phi, double omega, const DriveChain& chain);

// Peak source voltage such that a matched load receives the available power
// (after line-1 loss): sqrt(8 P Re(Zs)).
double SourceVoltageAmplitude(const DriveChain& chain);

// Peak current through the loop inductance.
double LoopCurrent(double phi, double omega, const DriveChain& chain);

// |Gamma| = |(Zin - Z0) / (Zin + Z0)|.
double Reflection(Impedance zin, double z0);

// f1 / sqrt(P), in Hz per sqrt(W).
double DrivingEfficiency(double f1, double power);

struct TuneResult {
  double phi_opt = 0.0;  // in [0, pi)
  Impedance zin_at_opt;
  double loop_current_amplitude = 0.0;
  double reflection_coefficient_magnitude = 0.0;
};

// argmin over phi in [0, pi) of |Zin|: uniform grid of `grid_points`
// (at least 720) then golden-section refinement of the best bracket.
TuneResult OptimalPhase(double omega, const DriveChain& chain,
                        int grid_points = 720);

struct SweepSample {
  double phi = 0.0;
  Impedance zin;  // NaN components at a pole
  double loop_current = 0.0;
  bool pole = false;
};

// phi_k = k pi / n for k in [0, n).
std::vector<SweepSample> PhiSweep(double omega, const DriveChain& chain,
                                  int n_points);

}  // namespace nvloop::rf

#endif  // NVLOOP_RF_NETWORK_HPP_
