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

#include "nvloop/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "nvloop/constants.hpp"
#include "nvloop/errors.hpp"
#include "nvloop/magnetics.hpp"
#include "nvloop/rf_network.hpp"
#include "nvloop/signal_analysis.hpp"
#include "nvloop/spin_dynamics.hpp"

namespace nvloop::cli {
namespace {

namespace fs = std::filesystem;
using config::Config;
using config::ConfigError;
using config::Dimension;

constexpr double kDeg = kPi / 180.0;

// ---------------------------------------------------------------------------
// Validation helpers. Every message starts with the config key.

void Check(bool ok, const std::string& key, const char* what) {
  if (!ok) throw ConfigError(key + " " + what);
}

double Positive(const Config& c, const std::string& key, double fallback,
                Dimension dim, double scale) {
  const double v = c.Quantity(key, fallback, dim, scale);
  Check(v > 0.0, key, "must be > 0");
  return v;
}

double NonNegative(const Config& c, const std::string& key, double fallback,
                   Dimension dim, double scale) {
  const double v = c.Quantity(key, fallback, dim, scale);
  Check(v >= 0.0, key, "must be >= 0");
  return v;
}

long long IntAtLeast(const Config& c, const std::string& key,
                     long long fallback, long long min) {
  const long long v = c.Integer(key, fallback);
  if (v < min) {
    throw ConfigError(key + " must be >= " + std::to_string(min));
  }
  return v;
}

// Module-level validation, rethrown as a configuration error.
void Validated(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV output.

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    WriteCells(header);
  }

  void Row(std::initializer_list<double> values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(FormatCsvNumber(v));
    WriteCells(cells);
  }

  void Cells(const std::vector<std::string>& cells) { WriteCells(cells); }

 private:
  void WriteCells(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Parameter blocks.

struct ChainSettings {
  rf::DriveChain chain;
  double frequency = 2.55e9;
  int sweep_points = 720;
  int grid_points = 720;
  std::vector<std::pair<double, double>> power_table;  // (f0 Hz, P W)
  double Omega() const { return 2.0 * kPi * frequency; }
};

std::vector<std::pair<double, double>> ReadPowerTable(const std::string& path) {
  const std::string key = "tune.power_table";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(key + ": cannot open '" + path + "'");
  std::vector<std::pair<double, double>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ConfigError(key + ": expected 'f0_Hz,power_W' rows");
    }
    const double f = config::ParseQuantity(line.substr(0, comma),
                                           Dimension::kFrequency, 1.0, key);
    const double p = config::ParseQuantity(line.substr(comma + 1),
                                           Dimension::kPower, 1.0, key);
    Check(f > 0.0 && p > 0.0, key, "rows must have f0_Hz > 0 and power_W > 0");
    rows.emplace_back(f, p);
  }
  Check(!rows.empty(), key, "must contain at least one row");
  return rows;
}

ChainSettings ReadChain(const Config& c) {
  ChainSettings s;
  rf::DriveChain& ch = s.chain;
  s.frequency = Positive(c, "drive.frequency_Hz", 2.55e9, Dimension::kFrequency, 1.0);
  ch.source_impedance = Positive(c, "chain.source_impedance_ohm", 50.0, Dimension::kNone, 1.0);
  ch.line_impedance = Positive(c, "chain.line_impedance_ohm", 50.0, Dimension::kNone, 1.0);
  ch.available_power = Positive(c, "chain.available_power_W", 34.8, Dimension::kPower, 1.0);
  ch.line2_phase = c.Quantity("chain.line2_phase_deg", 0.0, Dimension::kAngle, kDeg);
  ch.blocking_capacitance =
      Positive(c, "chain.blocking_capacitance_pF", 0.5e-12, Dimension::kCapacitance, 1e-12);
  ch.loop_inductance =
      Positive(c, "chain.loop_inductance_nH", 5.7e-9, Dimension::kInductance, 1e-9);
  ch.parasitic_shunt_capacitance = NonNegative(
      c, "chain.parasitic_shunt_capacitance_pF", 0.0, Dimension::kCapacitance, 1e-12);
  ch.line_loss_db = NonNegative(c, "chain.line_loss_dB", 0.0, Dimension::kNone, 1.0);
  s.sweep_points = static_cast<int>(IntAtLeast(c, "tune.n_points", 720, 2));
  s.grid_points = static_cast<int>(IntAtLeast(c, "tune.grid_points", 720, 720));
  if (const auto path = c.Raw("tune.power_table")) {
    s.power_table = ReadPowerTable(*path);
  }
  Validated([&] { ch.Validate(); });
  return s;
}

struct FieldSettings {
  magnetics::LoopGeometry geometry;
  magnetics::NVFrame frame;
  magnetics::EvalPlane plane;
  magnetics::SpotModel spot;
  bool calibrate = false;
  double target_ratio = 1.109;
  double offset = 50e-6;
  double offset_direction = kPi;
};

FieldSettings ReadField(const Config& c) {
  FieldSettings s;
  auto& g = s.geometry;
  const auto reference = magnetics::LoopGeometry::ReferenceDevice();
  std::vector<double> radii, widths, thick, z;
  for (const auto& t : reference.turns) {
    radii.push_back(t.radius);
    widths.push_back(t.trace_width);
    thick.push_back(t.trace_thickness);
    z.push_back(t.z_offset);
  }
  radii = c.QuantityList("geometry.radii_um", radii, Dimension::kLength, 1e-6);
  widths = c.QuantityList("geometry.widths_um", widths, Dimension::kLength, 1e-6);
  thick = c.QuantityList("geometry.thicknesses_um", thick, Dimension::kLength, 1e-6);
  z = c.QuantityList("geometry.z_offsets_um", z, Dimension::kLength, 1e-6);
  const size_t n = radii.size();
  Check(widths.size() == n && thick.size() == n && z.size() == n,
        "geometry.radii_um", "must have as many entries as widths_um, "
        "thicknesses_um and z_offsets_um");
  for (size_t i = 0; i < n; ++i) {
    Check(radii[i] > 0.0, "geometry.radii_um", "entries must be > 0");
    Check(widths[i] > 0.0, "geometry.widths_um", "entries must be > 0");
    Check(thick[i] > 0.0, "geometry.thicknesses_um", "entries must be > 0");
    Check(i == 0 || radii[i] > radii[i - 1], "geometry.radii_um",
          "must be strictly increasing");
    g.turns.push_back({radii[i], z[i], widths[i], thick[i]});
  }
  g.segments_per_turn = static_cast<int>(IntAtLeast(c, "geometry.segments_per_turn", 256, 64));
  g.filaments_across_width = static_cast<int>(IntAtLeast(c, "geometry.filaments_width", 3, 1));
  g.filaments_across_thickness =
      static_cast<int>(IntAtLeast(c, "geometry.filaments_thickness", 3, 1));

  s.frame.axis_tilt = c.Quantity("frame.axis_tilt_deg", s.frame.axis_tilt, Dimension::kAngle, kDeg);
  Check(s.frame.axis_tilt >= 0.0 && s.frame.axis_tilt <= kPi / 2.0 + 1e-15,
        "frame.axis_tilt_deg", "must be in [0, 90]");
  s.frame.azimuth = c.Quantity("frame.azimuth_deg", 0.0, Dimension::kAngle, kDeg);

  s.plane.standoff_height = Positive(c, "plane.standoff_um", 20e-6, Dimension::kLength, 1e-6);
  const double extent = Positive(c, "plane.extent_um", 280e-6, Dimension::kLength, 1e-6);
  s.plane.extent_x = s.plane.extent_y = extent;
  s.plane.pixel_pitch = Positive(c, "plane.pixel_pitch_um", 10e-6, Dimension::kLength, 1e-6);
  Check(extent >= s.plane.pixel_pitch, "plane.extent_um", "must be >= plane.pixel_pitch_um");

  s.spot.enabled = c.Boolean("map.spot_averaging", false);
  s.spot.diameter = Positive(c, "map.spot_diameter_um", 5e-6, Dimension::kLength, 1e-6);
  s.calibrate = c.Boolean("map.calibrate", false);
  s.target_ratio = Positive(c, "map.target_ratio", 1.109, Dimension::kNone, 1.0);
  s.offset = Positive(c, "map.offset_um", 50e-6, Dimension::kLength, 1e-6);
  s.offset_direction = c.Quantity("map.offset_direction_deg", kPi, Dimension::kAngle, kDeg);
  Validated([&] {
    g.Validate();
    s.frame.Validate();
    s.plane.Validate();
  });
  return s;
}

// Applies the standoff calibration when requested; returns the standoff used.
double ResolveStandoff(FieldSettings& f, ScenarioReport& report) {
  if (f.calibrate) {
    f.plane.standoff_height = magnetics::CalibrateStandoff(
        f.geometry, f.plane, f.frame, f.target_ratio, f.offset, 1e-6, 200e-6,
        f.offset_direction, f.spot);
    report.Add("standoff_calibrated", 1.0);
  }
  report.Add("standoff_um", f.plane.standoff_height * 1e6);
  return f.plane.standoff_height;
}

spin::NVConstants ReadConstants(const Config& c) {
  spin::NVConstants k;
  k.zero_field_splitting =
      Positive(c, "nv.zero_field_splitting_Hz", kZeroFieldSplitting, Dimension::kFrequency, 1.0);
  k.gyromagnetic_ratio =
      Positive(c, "nv.gyromagnetic_ratio_Hz_per_T", kGyromagneticRatio, Dimension::kNone, 1.0);
  if (c.Has("nv.t2_us")) {
    k.t2 = Positive(c, "nv.t2_us", 0.0, Dimension::kTime, 1e-6);
  }
  k.t2_exponent = Positive(c, "nv.t2_exponent", 1.0, Dimension::kNone, 1.0);
  return k;
}

spin::ReadoutModel ReadReadout(const Config& c, const RunOptions& opts) {
  spin::ReadoutModel r;
  r.contrast_depth = Positive(c, "readout.contrast_depth", 0.03, Dimension::kNone, 1.0);
  Check(r.contrast_depth <= 1.0, "readout.contrast_depth", "must be <= 1");
  r.noise_sigma = NonNegative(c, "readout.noise_sigma", 0.0, Dimension::kNone, 1.0);
  r.convention = c.Choice("readout.convention", "sin", {"sin", "cos"}) == "sin"
                     ? spin::ReadoutConvention::kSin
                     : spin::ReadoutConvention::kCos;
  const long long seed = c.Integer("seed", 0);
  Check(seed >= 0, "seed", "must be >= 0");
  r.seed = opts.seed.value_or(static_cast<std::uint64_t>(seed));
  return r;
}

signal::SpectrumOptions ReadSpectrumOptions(const Config& c) {
  signal::SpectrumOptions o;
  o.window = c.Choice("spectrum.window", "rectangular", {"rectangular", "hann"}) ==
                     "rectangular"
                 ? signal::Window::kRectangular
                 : signal::Window::kHann;
  o.zero_pad_factor = static_cast<int>(IntAtLeast(c, "spectrum.zero_pad", 4, 1));
  return o;
}

void WriteSpectrum(const fs::path& path, const signal::Spectrum& spec) {
  CsvWriter csv(path, {"freq_Hz", "magnitude"});
  for (size_t k = 0; k < spec.freqs.size(); ++k) {
    csv.Row({spec.freqs[k], spec.magnitudes[k]});
  }
}

fs::path Emit(ScenarioReport& report, const RunOptions& opts,
              const std::string& name) {
  const fs::path p = opts.output_dir / name;
  report.files.push_back(p);
  return p;
}

double CenterF1PerAmp(const FieldSettings& f, double gamma) {
  return magnetics::RabiFrequency(
      magnetics::B1PerpAt(0.0, 0.0, f.geometry, f.plane, f.frame, 1.0, f.spot),
      gamma);
}

// ---------------------------------------------------------------------------
// Scenarios.

ScenarioReport RunTune(const Config& c, const RunOptions& opts) {
  ChainSettings s = ReadChain(c);
  FieldSettings f = ReadField(c);
  const spin::NVConstants k = ReadConstants(c);

  ScenarioReport report;
  ResolveStandoff(f, report);
  const double f1_per_amp = CenterF1PerAmp(f, k.gyromagnetic_ratio);
  report.Add("f1_per_A_Hz", f1_per_amp);

  const auto sweep = rf::PhiSweep(s.Omega(), s.chain, s.sweep_points);
  {
    CsvWriter csv(Emit(report, opts, "f1_vs_phi.csv"),
                  {"phi_deg", "zin_re", "zin_im", "current_A", "f1_Hz"});
    for (const auto& p : sweep) {
      csv.Row({p.phi / kDeg, p.zin.real(), p.zin.imag(), p.loop_current,
               p.loop_current * f1_per_amp});
    }
  }

  const rf::TuneResult tuned = rf::OptimalPhase(s.Omega(), s.chain, s.grid_points);
  rf::DriveChain fixed = s.chain;
  fixed.termination = rf::Termination::kFixed50Ohm;
  const double fixed_current = rf::LoopCurrent(0.0, s.Omega(), fixed);
  const rf::Impedance fixed_zin = rf::Zin(0.0, s.Omega(), fixed);

  const double f1_tuned = tuned.loop_current_amplitude * f1_per_amp;
  const double f1_fixed = fixed_current * f1_per_amp;
  report.Add("phi_opt_deg", tuned.phi_opt / kDeg);
  report.Add("phi_plus_phi0_deg",
             std::fmod(tuned.phi_opt + s.chain.line2_phase, kPi) / kDeg);
  report.Add("zin_opt_re_ohm", tuned.zin_at_opt.real());
  report.Add("zin_opt_im_ohm", tuned.zin_at_opt.imag());
  report.Add("zin_opt_abs_ohm", std::abs(tuned.zin_at_opt));
  report.Add("reflection_opt", tuned.reflection_coefficient_magnitude);
  report.Add("current_opt_A", tuned.loop_current_amplitude);
  report.Add("f1_center_opt_Hz", f1_tuned);
  report.Add("efficiency_opt_Hz_per_sqrtW",
             rf::DrivingEfficiency(f1_tuned, s.chain.available_power));
  report.Add("fixed50_zin_abs_ohm", std::abs(fixed_zin));
  report.Add("fixed50_current_A", fixed_current);
  report.Add("fixed50_f1_center_Hz", f1_fixed);
  report.Add("fixed50_efficiency_Hz_per_sqrtW",
             rf::DrivingEfficiency(f1_fixed, s.chain.available_power));

  if (!s.power_table.empty()) {
    CsvWriter csv(Emit(report, opts, "tuned_vs_fixed.csv"),
                  {"f0_Hz", "power_W", "phi_opt_deg", "f1_tuned_Hz",
                   "f1_fixed_Hz", "efficiency_tuned", "efficiency_fixed"});
    for (const auto& [f0, power] : s.power_table) {
      rf::DriveChain ch = s.chain;
      ch.available_power = power;
      const double w = 2.0 * kPi * f0;
      const auto t = rf::OptimalPhase(w, ch, s.grid_points);
      rf::DriveChain fx = ch;
      fx.termination = rf::Termination::kFixed50Ohm;
      const double ft = t.loop_current_amplitude * f1_per_amp;
      const double ff = rf::LoopCurrent(0.0, w, fx) * f1_per_amp;
      csv.Row({f0, power, t.phi_opt / kDeg, ft, ff,
               rf::DrivingEfficiency(ft, power),
               rf::DrivingEfficiency(ff, power)});
    }
  }
  return report;
}

ScenarioReport RunMap(const Config& c, const RunOptions& opts) {
  FieldSettings f = ReadField(c);
  const spin::NVConstants k = ReadConstants(c);
  const bool by_f1 = c.Has("map.center_f1_Hz");
  const bool by_current = c.Has("map.current_A");
  Check(!(by_f1 && by_current), "map.center_f1_Hz",
        "and map.current_A are mutually exclusive");
  double center_f1 = 0.0;
  double current = 0.0;
  std::optional<ChainSettings> chain;
  if (by_f1) {
    center_f1 = Positive(c, "map.center_f1_Hz", 0.0, Dimension::kFrequency, 1.0);
  } else if (by_current) {
    current = Positive(c, "map.current_A", 0.0, Dimension::kNone, 1.0);
  } else {
    chain = ReadChain(c);
  }

  ScenarioReport report;
  ResolveStandoff(f, report);
  if (by_f1) {
    current = center_f1 / CenterF1PerAmp(f, k.gyromagnetic_ratio);
  } else if (chain) {
    current = rf::OptimalPhase(chain->Omega(), chain->chain, chain->grid_points)
                  .loop_current_amplitude;
  }
  report.Add("current_A", current);

  const auto map = magnetics::F1Map(f.geometry, f.plane, f.frame, current,
                                    f.spot, k.gyromagnetic_ratio);
  if (chain) {
    report.Add("drive_frequency_Hz", chain->frequency);
  }
  {
    CsvWriter csv(Emit(report, opts, "f1_map.csv"),
                  {"x_um", "y_um", "f1_Hz", "flagged"});
    for (const auto& px : map.pixels) {
      csv.Row({px.x * 1e6, px.y * 1e6, px.f1, px.flagged ? 1.0 : 0.0});
    }
  }
  const double center =
      magnetics::RabiFrequency(magnetics::B1PerpAt(0.0, 0.0, f.geometry, f.plane,
                                                   f.frame, current, f.spot),
                               k.gyromagnetic_ratio);
  report.Add("f1_center_Hz", center);
  report.Add("offset_ratio",
             magnetics::OffsetRatio(f.geometry, f.plane, f.frame, f.offset,
                                    f.offset_direction, f.spot));
  for (double side : {40e-6, 100e-6}) {
    if (side > f.plane.extent_x + 1e-12) continue;
    const auto h = magnetics::ComputeHomogeneity(map, side);
    const std::string tag = "square_" + std::to_string(static_cast<int>(std::lround(side * 1e6))) + "um";
    report.Add(tag + "_mean_f1_Hz", h.mean);
    report.Add(tag + "_normalized_std", h.normalized_std);
    report.Add(tag + "_pixels", h.pixel_count);
  }
  int flagged = 0;
  for (const auto& px : map.pixels) flagged += px.flagged;
  report.Add("flagged_pixels", flagged);
  return report;
}

ScenarioReport RunEsr(const Config& c, const RunOptions& opts) {
  const spin::NVConstants k = ReadConstants(c);
  const auto fields = c.QuantityList("esr.b0_G", {116e-4, 526e-4, 1125e-4},
                                     Dimension::kMagneticField, 1.0 / kGaussPerTesla);
  for (double b : fields) Check(b >= 0.0, "esr.b0_G", "entries must be >= 0");

  ScenarioReport report;
  CsvWriter csv(Emit(report, opts, "esr.csv"), {"b0_G", "f_minus_Hz", "f_plus_Hz"});
  for (size_t i = 0; i < fields.size(); ++i) {
    const auto e = spin::ComputeEsrFrequencies(fields[i], k);
    csv.Row({fields[i] * kGaussPerTesla, e.f_minus, e.f_plus});
    const std::string tag = "b0[" + std::to_string(i) + "]";
    report.AddExact(tag + "_G", fields[i] * kGaussPerTesla);
    report.Add(tag + "_f_minus_Hz", e.f_minus);
    report.Add(tag + "_f_plus_Hz", e.f_plus);
  }
  return report;
}

ScenarioReport RunRabi(const Config& c, const RunOptions& opts) {
  const double f1 = Positive(c, "rabi.f1_Hz", 136.3e6, Dimension::kFrequency, 1.0);
  const double detuning = c.Quantity("rabi.detuning_Hz", 0.0, Dimension::kFrequency, 1.0);
  const double duration = Positive(c, "rabi.duration_us", 2e-6, Dimension::kTime, 1e-6);
  const int n = static_cast<int>(IntAtLeast(c, "rabi.n_points", 4000, 2));
  const std::string ensemble = c.Choice("rabi.ensemble", "single", {"single", "spot"});
  const spin::ReadoutModel readout = ReadReadout(c, opts);
  const signal::SpectrumOptions spec_opts = ReadSpectrumOptions(c);

  std::optional<FieldSettings> field;
  double position = 0.0;
  if (ensemble == "spot") {
    field = ReadField(c);
    position = NonNegative(c, "rabi.position_um", 0.0, Dimension::kLength, 1e-6);
    Check(detuning == 0.0, "rabi.detuning_Hz", "must be 0 with rabi.ensemble = spot");
  }

  ScenarioReport report;
  std::vector<double> f1_samples{f1};
  if (field) {
    ResolveStandoff(*field, report);
    f1_samples = magnetics::SpotF1Samples(
        position * std::cos(field->offset_direction),
        position * std::sin(field->offset_direction), field->geometry,
        field->plane, field->frame, field->spot.diameter);
    // Scale so the loop center reads rabi.f1_Hz.
    const double center = magnetics::RabiFrequency(magnetics::B1PerpAt(
        0.0, 0.0, field->geometry, field->plane, field->frame, 1.0));
    for (double& v : f1_samples) v *= f1 / center;
  }

  const double dt = duration / n;
  std::vector<double> times(n);
  for (int i = 0; i < n; ++i) times[i] = i * dt;
  signal::TimeSeries pop;
  if (detuning != 0.0) {
    pop.sample_period = dt;
    pop.samples.resize(n);
    for (int i = 0; i < n; ++i) pop.samples[i] = spin::RabiPopulation(times[i], f1, detuning);
  } else {
    pop = spin::EnsembleRabi(f1_samples, times);
  }

  double min_pl = 1.0;
  {
    CsvWriter csv(Emit(report, opts, "rabi.csv"), {"t_s", "population", "pl_contrast"});
    for (int i = 0; i < n; ++i) {
      const double pl = 1.0 - readout.contrast_depth * pop.samples[i];
      min_pl = std::min(min_pl, pl);
      csv.Row({times[i], pop.samples[i], pl});
    }
  }
  const auto spec = signal::ComputeSpectrum(pop, spec_opts);
  WriteSpectrum(Emit(report, opts, "rabi_spectrum.csv"), spec);
  const double w = std::sqrt(f1 * f1 + detuning * detuning);
  report.Add("pi_pulse_s", 1.0 / (2.0 * w));
  report.Add("min_pl_contrast", min_pl);
  report.Add("spot_samples", static_cast<double>(f1_samples.size()));
  try {
    const auto peak = signal::FindPeak(spec, 0.2 * w, std::min(5.0 * w, spec.freqs.back()));
    report.Add("f_peak_Hz", peak.f_peak);
    report.Add("fwhm_Hz", peak.fwhm);
  } catch (const NumericalError&) {
    report.Add("peak_found", 0.0);
  }
  return report;
}

ScenarioReport RunOdmr(const Config& c, const RunOptions& opts) {
  const spin::NVConstants k = ReadConstants(c);
  double f0 = 0.0;
  if (c.Has("odmr.f0_Hz")) {
    f0 = Positive(c, "odmr.f0_Hz", 0.0, Dimension::kFrequency, 1.0);
  } else {
    const double b0 = NonNegative(c, "odmr.b0_G", 116e-4, Dimension::kMagneticField,
                                  1.0 / kGaussPerTesla);
    const auto e = spin::ComputeEsrFrequencies(b0, k);
    f0 = c.Choice("odmr.transition", "minus", {"minus", "plus"}) == "minus" ? e.f_minus
                                                                          : e.f_plus;
    Check(f0 > 0.0, "odmr.b0_G", "puts the minus transition at 0 Hz");
  }
  const double f1 = Positive(c, "odmr.f1_Hz", 1e6, Dimension::kFrequency, 1.0);
  const double pulse = Positive(c, "odmr.pulse_duration_us", 20e-6, Dimension::kTime, 1e-6);
  const double span = Positive(c, "odmr.span_Hz", 20e6, Dimension::kFrequency, 1.0);
  const int n = static_cast<int>(IntAtLeast(c, "odmr.n_points", 401, 3));
  const spin::ReadoutModel readout = ReadReadout(c, opts);

  std::vector<double> freqs(n);
  for (int i = 0; i < n; ++i) freqs[i] = f0 - span / 2.0 + span * i / (n - 1);
  const auto contrast = spin::OdmrSpectrum(freqs, f0, f1, pulse, readout.contrast_depth);

  ScenarioReport report;
  {
    CsvWriter csv(Emit(report, opts, "odmr.csv"), {"freq_Hz", "pl_contrast"});
    for (int i = 0; i < n; ++i) csv.Row({freqs[i], contrast[i]});
  }
  const auto it = std::min_element(contrast.begin(), contrast.end());
  const size_t m = static_cast<size_t>(it - contrast.begin());
  report.Add("f0_Hz", f0);
  report.Add("dip_freq_Hz", freqs[m]);
  report.Add("dip_contrast", *it);
  // Half-depth crossings by linear interpolation.
  const double half = 1.0 - 0.5 * (1.0 - *it);
  size_t lo = m;
  while (lo > 0 && contrast[lo - 1] <= half) --lo;
  size_t hi = m;
  while (hi + 1 < contrast.size() && contrast[hi + 1] <= half) ++hi;
  if (lo > 0 && hi + 1 < contrast.size()) {
    const double fl = freqs[lo - 1] + (freqs[lo] - freqs[lo - 1]) *
                                          (contrast[lo - 1] - half) /
                                          (contrast[lo - 1] - contrast[lo]);
    const double fh = freqs[hi] + (freqs[hi + 1] - freqs[hi]) *
                                      (half - contrast[hi]) /
                                      (contrast[hi + 1] - contrast[hi]);
    report.Add("dip_fwhm_Hz", fh - fl);
  }
  return report;
}

spin::CasrParams ReadCasr(const Config& c, const RunOptions& opts) {
  spin::CasrParams p;
  p.total_time = Positive(c, "casr.total_time_s", 1.0, Dimension::kTime, 1.0);
  p.f_signal = Positive(c, "casr.f_signal_Hz", 29.992e6, Dimension::kFrequency, 1.0);
  p.signal_amplitude = NonNegative(c, "casr.signal_amplitude_G", 1e-6,
                                   Dimension::kMagneticField, 1.0 / kGaussPerTesla);
  p.signal_phase = c.Quantity("casr.signal_phase_deg", 0.0, Dimension::kAngle, kDeg);
  p.generator_offset_ppm = c.Quantity("casr.generator_offset_ppm", 0.0, Dimension::kNone, 1.0);
  p.f_casr = Positive(c, "casr.f_casr_Hz", 30e6, Dimension::kFrequency, 1.0);
  p.n_repeats = static_cast<int>(IntAtLeast(c, "casr.n_repeats", 6, 1));
  p.f1 = Positive(c, "casr.f1_Hz", 136.3e6, Dimension::kFrequency, 1.0);
  p.shape = c.Choice("casr.pulse_shape", "finite", {"finite", "instantaneous"}) == "finite"
                ? spin::PulseShape::kFinite
                : spin::PulseShape::kInstantaneous;
  p.timing.post_sequence_delay =
      NonNegative(c, "casr.post_sequence_delay_us", 2e-6, Dimension::kTime, 1e-6);
  p.timing.laser_duration = NonNegative(c, "casr.laser_duration_us", 20e-6, Dimension::kTime, 1e-6);
  p.timing.pre_sequence_delay =
      NonNegative(c, "casr.pre_sequence_delay_us", 1e-6, Dimension::kTime, 1e-6);
  p.timing.readout_offset = NonNegative(c, "casr.readout_offset_us", 1.2e-6, Dimension::kTime, 1e-6);
  p.timing.synchronize = c.Boolean("casr.synchronize", true);
  p.readout = ReadReadout(c, opts);
  p.constants = ReadConstants(c);
  if (p.shape == spin::PulseShape::kFinite && !(p.f1 > p.f_casr)) {
    throw PulsesOverlap("casr.f1_Hz: pulses overlap: f1 must exceed casr.f_casr_Hz");
  }
  Validated([&] { p.Validate(); });
  return p;
}

ScenarioReport RunCasr(const Config& c, const RunOptions& opts) {
  const spin::CasrParams p = ReadCasr(c, opts);
  const signal::SpectrumOptions spec_opts = ReadSpectrumOptions(c);
  const double search_lo = NonNegative(c, "casr.search_lo_Hz", 0.0, Dimension::kFrequency, 1.0);
  const double search_hi_cfg = NonNegative(c, "casr.search_hi_Hz", 0.0, Dimension::kFrequency, 1.0);

  ScenarioReport report;
  const auto run = spin::CasrRun(p);
  {
    CsvWriter csv(Emit(report, opts, "casr_pl.csv"), {"t_s", "pl_contrast"});
    for (size_t i = 0; i < run.pl.samples.size(); ++i) {
      csv.Row({run.pl.TimeAt(i), run.pl.samples[i]});
    }
  }
  const auto spec = signal::ComputeSpectrum(run.pl, spec_opts);
  WriteSpectrum(Emit(report, opts, "casr_spectrum.csv"), spec);

  const double duration = run.pl.samples.size() * run.block_period;
  const double lo = search_lo > 0.0 ? search_lo : 3.0 / duration;
  const double hi = search_hi_cfg > 0.0 ? std::min(search_hi_cfg, spec.freqs.back())
                                        : spec.freqs.back();
  report.Add("block_period_s", run.block_period);
  report.Add("samples", static_cast<double>(run.pl.samples.size()));
  report.Add("fourier_limit_Hz", 1.0 / duration);
  const double tau = 1.0 / (2.0 * p.f_casr);
  report.Add("expected_delta_f_Hz",
             std::abs(p.f_signal * (1.0 + 1e-6 * p.generator_offset_ppm) - 1.0 / (2.0 * tau)));

  const double max_mag = *std::max_element(spec.magnitudes.begin(), spec.magnitudes.end());
  bool found = false;
  if (max_mag > 1e-12 * p.readout.contrast_depth) {
    try {
      const auto peak = signal::FindPeak(spec, lo, hi);
      report.Add("f_peak_Hz", peak.f_peak);
      report.Add("peak_amplitude", peak.amplitude);
      report.Add("fwhm_Hz", peak.fwhm);
      found = true;
    } catch (const NumericalError&) {
    }
  }
  report.Add("peak_found", found ? 1.0 : 0.0);
  return report;
}

ScenarioReport RunInductance(const Config& c, const RunOptions& opts) {
  const FieldSettings f = ReadField(c);
  const auto& turns = f.geometry.turns;

  ScenarioReport report;
  const double total = magnetics::LoopInductance(f.geometry);
  {
    CsvWriter csv(Emit(report, opts, "inductance.csv"), {"term", "i", "j", "value_H"});
    for (size_t i = 0; i < turns.size(); ++i) {
      const double self = magnetics::SelfInductance(
          turns[i].radius,
          magnetics::EquivalentWireRadius(turns[i].trace_width, turns[i].trace_thickness));
      csv.Cells({"self", std::to_string(i), std::to_string(i), FormatCsvNumber(self)});
    }
    for (size_t i = 0; i < turns.size(); ++i) {
      for (size_t j = i + 1; j < turns.size(); ++j) {
        const double m = magnetics::MutualInductance(turns[i].radius, turns[i].z_offset,
                                                     turns[j].radius, turns[j].z_offset);
        csv.Cells({"mutual", std::to_string(i), std::to_string(j), FormatCsvNumber(m)});
      }
    }
    csv.Cells({"total", "", "", FormatCsvNumber(total)});
  }
  report.Add("inductance_nH", total * 1e9);
  return report;
}

std::string FormatScalar(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

std::optional<Scenario> ParseScenario(std::string_view name) {
  static const std::pair<std::string_view, Scenario> kTable[] = {
      {"tune", Scenario::kTune},   {"map", Scenario::kMap},
      {"esr", Scenario::kEsr},     {"rabi", Scenario::kRabi},
      {"odmr", Scenario::kOdmr},   {"casr", Scenario::kCasr},
      {"inductance", Scenario::kInductance}};
  for (const auto& [n, s] : kTable) {
    if (n == name) return s;
  }
  return std::nullopt;
}

std::string_view ScenarioName(Scenario s) {
  switch (s) {
    case Scenario::kTune: return "tune";
    case Scenario::kMap: return "map";
    case Scenario::kEsr: return "esr";
    case Scenario::kRabi: return "rabi";
    case Scenario::kOdmr: return "odmr";
    case Scenario::kCasr: return "casr";
    case Scenario::kInductance: return "inductance";
  }
  return "";
}

const std::vector<std::string>& ScenarioNames() {
  static const std::vector<std::string> kNames = {
      "tune", "map", "esr", "rabi", "odmr", "casr", "inductance"};
  return kNames;
}

const std::set<std::string>& KnownKeys() {
  static const std::set<std::string> kKeys = {
      "seed",
      "drive.frequency_Hz",
      "chain.source_impedance_ohm", "chain.line_impedance_ohm",
      "chain.available_power_W", "chain.line2_phase_deg",
      "chain.blocking_capacitance_pF", "chain.loop_inductance_nH",
      "chain.parasitic_shunt_capacitance_pF", "chain.line_loss_dB",
      "tune.n_points", "tune.grid_points", "tune.power_table",
      "geometry.radii_um", "geometry.widths_um", "geometry.thicknesses_um",
      "geometry.z_offsets_um", "geometry.segments_per_turn",
      "geometry.filaments_width", "geometry.filaments_thickness",
      "frame.axis_tilt_deg", "frame.azimuth_deg",
      "plane.standoff_um", "plane.extent_um", "plane.pixel_pitch_um",
      "map.spot_averaging", "map.spot_diameter_um", "map.calibrate",
      "map.target_ratio", "map.offset_um", "map.offset_direction_deg",
      "map.center_f1_Hz", "map.current_A",
      "nv.zero_field_splitting_Hz", "nv.gyromagnetic_ratio_Hz_per_T",
      "nv.t2_us", "nv.t2_exponent",
      "esr.b0_G",
      "rabi.f1_Hz", "rabi.detuning_Hz", "rabi.duration_us", "rabi.n_points",
      "rabi.ensemble", "rabi.position_um",
      "odmr.f0_Hz", "odmr.b0_G", "odmr.transition", "odmr.f1_Hz",
      "odmr.pulse_duration_us", "odmr.span_Hz", "odmr.n_points",
      "readout.contrast_depth", "readout.noise_sigma", "readout.convention",
      "spectrum.window", "spectrum.zero_pad",
      "casr.total_time_s", "casr.f_signal_Hz", "casr.signal_amplitude_G",
      "casr.signal_phase_deg", "casr.generator_offset_ppm", "casr.f_casr_Hz",
      "casr.n_repeats", "casr.f1_Hz", "casr.pulse_shape",
      "casr.post_sequence_delay_us", "casr.laser_duration_us",
      "casr.pre_sequence_delay_us", "casr.readout_offset_us",
      "casr.synchronize", "casr.search_lo_Hz", "casr.search_hi_Hz",
  };
  return kKeys;
}

std::string FormatCsvNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

void ScenarioReport::Add(std::string key, double value) {
  scalars.push_back({std::move(key), value, FormatScalar(value, 12)});
}

void ScenarioReport::AddExact(std::string key, double value) {
  scalars.push_back({std::move(key), value, FormatScalar(value, 17)});
}

std::optional<double> ScenarioReport::Get(std::string_view key) const {
  for (const auto& e : scalars) {
    if (e.key == key) return e.value;
  }
  return std::nullopt;
}

std::string ScenarioReport::ToText() const {
  std::ostringstream out;
  out << "scenario = " << scenario << '\n';
  for (const auto& e : scalars) out << e.key << " = " << e.text << '\n';
  for (const auto& f : files) out << "file = " << f.filename().string() << '\n';
  return out.str();
}

ScenarioReport RunScenario(Scenario scenario, const Config& cfg,
                           const RunOptions& opts) {
  cfg.RejectUnknown(KnownKeys());
  std::error_code ec;
  fs::create_directories(opts.output_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " +
                             opts.output_dir.string());
  }

  ScenarioReport report;
  switch (scenario) {
    case Scenario::kTune: report = RunTune(cfg, opts); break;
    case Scenario::kMap: report = RunMap(cfg, opts); break;
    case Scenario::kEsr: report = RunEsr(cfg, opts); break;
    case Scenario::kRabi: report = RunRabi(cfg, opts); break;
    case Scenario::kOdmr: report = RunOdmr(cfg, opts); break;
    case Scenario::kCasr: report = RunCasr(cfg, opts); break;
    case Scenario::kInductance: report = RunInductance(cfg, opts); break;
  }
  report.scenario = std::string(ScenarioName(scenario));
  const fs::path report_path = opts.output_dir / "report.txt";
  report.files.push_back(report_path);
  std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
  out << report.ToText();
  return report;
}

}  // namespace nvloop::cli
