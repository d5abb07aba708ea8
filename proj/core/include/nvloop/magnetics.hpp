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

// Quasi-static field and inductance of a multi-turn planar loop.
//
// The loop lies in the z = 0 plane with its axis along +z. Each turn is a
// closed polygon (segments_per_turn vertices) replicated into a bundle of
// filaments spanning its rectangular cross-section; the turn current is
// split equally between filaments. Turns carry the same current in the same
// sense (series connection).

#ifndef NVLOOP_MAGNETICS_HPP_
#define NVLOOP_MAGNETICS_HPP_

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

#include "nvloop/constants.hpp"

namespace nvloop::magnetics {

using Vec3 = Eigen::Vector3d;

struct Turn {
  double radius = 0.0;  // center of trace
  double z_offset = 0.0;  // center of trace cross-section
  double trace_width = 0.0;
  double trace_thickness = 0.0;
};

struct LoopGeometry {
  std::vector<Turn> turns;
  int segments_per_turn = 256;
  int filaments_across_width = 3;
  int filaments_across_thickness = 3;

  // Three Cu turns of 300/360/420 um diameter, 17 um wide, 3/9/9 um thick.
  static LoopGeometry ReferenceDevice();

  void Validate() const;

  // Smallest center-to-center distance between filaments of one bundle.
  double FilamentSpacing() const;
};

struct NVFrame {
  double axis_tilt = 0.9553166181245093;  // arccos(1/sqrt(3)), from +z
  double azimuth = 0.0;                   // of the tilt, from +x

  Vec3 Axis() const;
  void Validate() const;
};

struct EvalPlane {
  double standoff_height = 20e-6;  // z of the NV plane
  double extent_x = 280e-6;
  double extent_y = 280e-6;
  double pixel_pitch = 10e-6;

  void Validate() const;
  int PixelsX() const;
  int PixelsY() const;
};

// Average of b1_perp over a laser spot, sampled at 19 equal-area points
// (center + rings of 6 and 12).
struct SpotModel {
  bool enabled = false;
  double diameter = 5e-6;
};

struct FieldPixel {
  double x = 0.0;
  double y = 0.0;
  double b1_perp = 0.0;  // T
  double f1 = 0.0;       // Hz
  bool flagged = false;  // clearance violation; excluded from statistics
};

struct FieldMap {
  EvalPlane plane;
  int nx = 0;
  int ny = 0;
  std::vector<FieldPixel> pixels;  // row-major, y outer
  double drive_current = 0.0;
  double drive_frequency = 0.0;

  const FieldPixel& At(int ix, int iy) const { return pixels[iy * nx + ix]; }
};

struct Homogeneity {
  double mean = 0.0;
  double normalized_std = 0.0;
  int pixel_count = 0;
};

// Field of `geometry` carrying `current` at `point`. Throws ClearanceError
// when the point lies within one filament spacing of a filament.
Vec3 BiotSavart(const Vec3& point, const LoopGeometry& geometry,
                double current);

// |b - (b.n) n| for the NV axis n.
double PerpProjection(const Vec3& b, const NVFrame& frame);

// b1_perp at (x, y) on the evaluation plane, spot-averaged if enabled.
double B1PerpAt(double x, double y, const LoopGeometry& geometry,
                const EvalPlane& plane, const NVFrame& frame, double current,
                const SpotModel& spot = {});

// f1 at each of the laser-spot sample points around (x, y), unaveraged.
std::vector<double> SpotF1Samples(double x, double y,
                                  const LoopGeometry& geometry,
                                  const EvalPlane& plane, const NVFrame& frame,
                                  double diameter, double current = 1.0,
                                  double gamma = kGyromagneticRatio);

// Rabi frequency f1 = gamma * b1_perp / 2.
inline double RabiFrequency(double b1_perp,
                            double gamma = kGyromagneticRatio) {
  return gamma * b1_perp / 2.0;
}

FieldMap F1Map(const LoopGeometry& geometry, const EvalPlane& plane,
               const NVFrame& frame, double current,
               const SpotModel& spot = {}, double gamma = kGyromagneticRatio);

// Population statistics over unflagged pixels with |x|, |y| <= side / 2.
Homogeneity ComputeHomogeneity(const FieldMap& map, double square_side);

// Self inductance of a circular loop of round wire: mu0 R (ln(8R/a) - 2).
double SelfInductance(double radius, double wire_radius);

// Equivalent round-wire radius of a rectangular trace: 0.2235 (w + t).
double EquivalentWireRadius(double width, double thickness);

// Mutual inductance of two coaxial circular filaments (Maxwell's formula).
// Throws InvalidArgument for coincident filaments.
double MutualInductance(double r1, double z1, double r2, double z2);

// Sum of self terms plus all pairwise mutual terms between turn centerlines.
// Throws InvalidArgument when two turn cross-sections overlap.
double LoopInductance(const LoopGeometry& geometry);

// Ratio f1(offset along `direction` rad) / f1(center) on `plane`.
double OffsetRatio(const LoopGeometry& geometry, const EvalPlane& plane,
                   const NVFrame& frame, double offset, double direction = 0.0,
                   const SpotModel& spot = {});

// Lowest standoff height in [lo, hi] at which OffsetRatio equals
// `target_ratio`: a 64-step scan for the first sign change, then bisection.
// Throws NumericalError if no crossing is found.
double CalibrateStandoff(const LoopGeometry& geometry, const EvalPlane& plane,
                         const NVFrame& frame, double target_ratio,
                         double offset, double lo, double hi,
                         double direction = 0.0, const SpotModel& spot = {});

}  // namespace nvloop::magnetics

#endif  // NVLOOP_MAGNETICS_HPP_
