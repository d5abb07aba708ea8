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

#include "nvloop/rf_network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nvloop/errors.hpp"

namespace nvloop::rf {
namespace {

constexpr double kPi = std::numbers::pi;
// 20 log10(e): dB per neper of voltage attenuation.
constexpr double kDbPerNeper = 8.685889638065037;
// |denominator| below this fraction of |numerator| is treated as a pole.
constexpr double kPoleRelTol = 1e-12;

void Require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

// Impedance of the branch hanging off the capacitor: line 2 + open phase
// shifter, or line 2 terminated in 50 ohms. Equal-Z0 cascades add their
// propagation constants, so line 2 and the shifter collapse into one line.
Impedance BranchImpedance(double phi, const DriveChain& chain) {
  if (chain.termination == Termination::kFixed50Ohm) {
    return LineTransform(Load::Of(50.0), chain.line_impedance,
                         chain.line2_phase, chain.line_loss_db);
  }
  return LineTransform(Load::Open(), chain.line_impedance,
                       phi + chain.line2_phase, 2.0 * chain.line_loss_db);
}

Impedance CapacitorImpedance(double omega, double capacitance) {
  if (std::isinf(capacitance)) return {0.0, 0.0};
  return {0.0, -1.0 / (omega * capacitance)};
}

Impedance SeriesBranch(double phi, double omega, const DriveChain& chain) {
  const Impedance loop{0.0, omega * chain.loop_inductance};
  return loop + BranchImpedance(phi, chain) +
         CapacitorImpedance(omega, chain.blocking_capacitance);
}

double WrapPhase(double phi) {
  double r = std::fmod(phi, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r = 0.0;
  return r;
}

// |Zin|, +inf at a pole.
double AbsZinOrInf(double phi, double omega, const DriveChain& chain) {
  try {
    return std::abs(Zin(phi, omega, chain));
  } catch (const ImpedancePole&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

void DriveChain::Validate() const {
  Require(source_impedance > 0.0 && std::isfinite(source_impedance),
          "source_impedance must be > 0");
  Require(line_impedance > 0.0 && std::isfinite(line_impedance),
          "line_impedance must be > 0");
  Require(available_power > 0.0 && std::isfinite(available_power),
          "available_power must be > 0");
  Require(std::isfinite(line2_phase), "line2_phase must be finite");
  Require(blocking_capacitance > 0.0, "blocking_capacitance must be > 0");
  Require(loop_inductance >= 0.0 && std::isfinite(loop_inductance),
          "loop_inductance must be >= 0");
  Require(parasitic_shunt_capacitance >= 0.0 &&
              std::isfinite(parasitic_shunt_capacitance),
          "parasitic_shunt_capacitance must be >= 0");
  Require(line_loss_db >= 0.0 && std::isfinite(line_loss_db),
          "line_loss_db must be >= 0");
}

Impedance LineTransform(const Load& load, double z0, double electrical_phase,
                        double loss_db) {
  Require(z0 > 0.0, "z0 must be > 0");
  Require(std::isfinite(electrical_phase), "electrical_phase must be finite");
  Require(loss_db >= 0.0, "loss_db must be >= 0");

  const std::complex<double> gl{loss_db / kDbPerNeper, electrical_phase};
  const auto ch = std::cosh(gl);
  const auto sh = std::sinh(gl);

  std::complex<double> num;
  std::complex<double> den;
  if (load.is_open()) {
    num = z0 * ch;
    den = sh;
  } else {
    const Impedance zl = load.impedance();
    num = z0 * (zl * ch + z0 * sh);
    den = z0 * ch + zl * sh;
  }
  if (std::abs(den) <= kPoleRelTol * std::abs(num)) {
    throw ImpedancePole("impedance pole: open line of electrical length " +
                        std::to_string(electrical_phase) + " rad");
  }
  return num / den;
}

Impedance Z1(double phi, const DriveChain& chain) {
  Require(chain.termination == Termination::kOpenPhaseShifter,
          "z1 requires termination = open_phase_shifter");
  return BranchImpedance(phi, chain);
}

Impedance Z2(double phi, double omega, const DriveChain& chain) {
  Require(omega > 0.0, "omega must be > 0");
  return Z1(phi, chain) + CapacitorImpedance(omega, chain.blocking_capacitance);
}

Impedance Zin(double phi, double omega, const DriveChain& chain) {
  Require(omega > 0.0, "omega must be > 0");
  const Impedance series = SeriesBranch(phi, omega, chain);
  if (chain.parasitic_shunt_capacitance <= 0.0) return series;
  const Impedance shunt{0.0, -1.0 / (omega * chain.parasitic_shunt_capacitance)};
  return series * shunt / (series + shunt);
}

double SourceVoltageAmplitude(const DriveChain& chain) {
  const double delivered =
      chain.available_power * std::pow(10.0, -chain.line_loss_db / 10.0);
  return std::sqrt(8.0 * delivered * chain.source_impedance);
}

double LoopCurrent(double phi, double omega, const DriveChain& chain) {
  Require(omega > 0.0, "omega must be > 0");
  const double vs = SourceVoltageAmplitude(chain);
  const Impedance zs{chain.source_impedance, 0.0};
  const Impedance series = SeriesBranch(phi, omega, chain);
  if (chain.parasitic_shunt_capacitance <= 0.0) {
    return vs / std::abs(zs + series);
  }
  const Impedance shunt{0.0, -1.0 / (omega * chain.parasitic_shunt_capacitance)};
  const Impedance zin = series * shunt / (series + shunt);
  const auto source_current = vs / (zs + zin);
  return std::abs(source_current * shunt / (shunt + series));
}

double Reflection(Impedance zin, double z0) {
  Require(z0 > 0.0, "z0 must be > 0");
  const Impedance den = zin + z0;
  if (std::abs(den) == 0.0) {
    throw ImpedancePole("reflection pole: Zin = -Z0");
  }
  return std::abs((zin - z0) / den);
}

double DrivingEfficiency(double f1, double power) {
  Require(power > 0.0, "power must be > 0");
  return f1 / std::sqrt(power);
}

TuneResult OptimalPhase(double omega, const DriveChain& chain,
                        int grid_points) {
  Require(omega > 0.0, "omega must be > 0");
  Require(chain.termination == Termination::kOpenPhaseShifter,
          "optimal_phase requires termination = open_phase_shifter");
  chain.Validate();

  const int n = std::max(grid_points, 720);
  const double step = kPi / n;
  std::vector<double> values(n);
  for (int k = 0; k < n; ++k) values[k] = AbsZinOrInf(k * step, omega, chain);

  const auto best = std::min_element(values.begin(), values.end());
  double largest = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) largest = std::max(largest, v);
  }
  if (!std::isfinite(*best) || largest - *best <= 1e-12 * largest) {
    throw FlatObjective("flat objective: |Zin| does not depend on phi");
  }

  // Golden-section search on the bracket around the best grid point; the
  // bracket may straddle 0.
  const double center = static_cast<double>(best - values.begin()) * step;
  double lo = center - step;
  double hi = center + step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = AbsZinOrInf(a, omega, chain);
  double fb = AbsZinOrInf(b, omega, chain);
  while (hi - lo > 1e-13) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = AbsZinOrInf(a, omega, chain);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = AbsZinOrInf(b, omega, chain);
    }
  }
  double phi_opt = 0.5 * (lo + hi);
  if (AbsZinOrInf(phi_opt, omega, chain) > *best) phi_opt = center;

  TuneResult result;
  result.phi_opt = WrapPhase(phi_opt);
  result.zin_at_opt = Zin(result.phi_opt, omega, chain);
  result.loop_current_amplitude = LoopCurrent(result.phi_opt, omega, chain);
  result.reflection_coefficient_magnitude =
      Reflection(result.zin_at_opt, chain.source_impedance);
  return result;
}

std::vector<SweepSample> PhiSweep(double omega, const DriveChain& chain,
                                  int n_points) {
  Require(n_points >= 2, "n_points must be >= 2");
  Require(omega > 0.0, "omega must be > 0");
  chain.Validate();

  std::vector<SweepSample> out(n_points);
  for (int k = 0; k < n_points; ++k) {
    SweepSample& s = out[k];
    s.phi = kPi * k / n_points;
    try {
      s.zin = Zin(s.phi, omega, chain);
      s.loop_current = LoopCurrent(s.phi, omega, chain);
    } catch (const ImpedancePole&) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      s.zin = {nan, nan};
      s.loop_current = 0.0;
      s.pole = true;
    }
  }
  return out;
}

}  // namespace nvloop::rf
