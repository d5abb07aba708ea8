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

#include "nvloop/magnetics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "nvloop/errors.hpp"

namespace nvloop::magnetics {
namespace {

void Require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

struct Filament {
  double radius;
  double z;
};

std::vector<Filament> BundleOf(const Turn& turn, int nw, int nt) {
  std::vector<Filament> out;
  out.reserve(static_cast<size_t>(nw) * nt);
  for (int j = 0; j < nt; ++j) {
    const double z = turn.z_offset - turn.trace_thickness / 2.0 +
                     (j + 0.5) * turn.trace_thickness / nt;
    for (int i = 0; i < nw; ++i) {
      const double r = turn.radius - turn.trace_width / 2.0 +
                       (i + 0.5) * turn.trace_width / nw;
      out.push_back({r, z});
    }
  }
  return out;
}

// Field of a straight segment a->b carrying unit current, times 4 pi / mu0.
Vec3 SegmentKernel(const Vec3& point, const Vec3& a, const Vec3& b) {
  const Vec3 ri = a - point;
  const Vec3 rf = b - point;
  const double li = ri.norm();
  const double lf = rf.norm();
  const double denom = li * lf * (li * lf + ri.dot(rf));
  return ri.cross(rf) * ((li + lf) / denom);
}

// Closed polygon of n vertices on a circle, summed in fixed vertex order.
Vec3 PolygonField(const Vec3& point, double radius, double z, int n) {
  Vec3 sum = Vec3::Zero();
  const double dphi = 2.0 * kPi / n;
  Vec3 prev(radius, 0.0, z);
  for (int k = 1; k <= n; ++k) {
    const double phi = (k == n) ? 0.0 : k * dphi;
    const Vec3 next(radius * std::cos(phi), radius * std::sin(phi), z);
    sum += SegmentKernel(point, prev, next);
    prev = next;
  }
  return sum;
}

// Equal-area sample offsets of a disk of unit radius.
std::array<std::array<double, 2>, 19> SpotOffsets() {
  std::array<std::array<double, 2>, 19> pts{};
  pts[0] = {0.0, 0.0};
  const double r1 = std::sqrt(4.0 / 19.0);
  const double r2 = std::sqrt(13.0 / 19.0);
  for (int k = 0; k < 6; ++k) {
    const double a = 2.0 * kPi * k / 6.0;
    pts[1 + k] = {r1 * std::cos(a), r1 * std::sin(a)};
  }
  for (int k = 0; k < 12; ++k) {
    const double a = 2.0 * kPi * (k + 0.5) / 12.0;
    pts[7 + k] = {r2 * std::cos(a), r2 * std::sin(a)};
  }
  return pts;
}

}  // namespace

LoopGeometry LoopGeometry::ReferenceDevice() {
  LoopGeometry g;
  const double radii[] = {150e-6, 180e-6, 210e-6};
  const double thickness[] = {3e-6, 9e-6, 9e-6};
  for (int i = 0; i < 3; ++i) {
    // Traces sit on the dielectric at z = 0.
    g.turns.push_back({radii[i], thickness[i] / 2.0, 17e-6, thickness[i]});
  }
  return g;
}

void LoopGeometry::Validate() const {
  Require(!turns.empty(), "geometry.turns must be nonempty");
  Require(segments_per_turn >= 64, "geometry.segments_per_turn must be >= 64");
  Require(filaments_across_width >= 1 && filaments_across_thickness >= 1,
          "geometry.filaments must be >= 1");
  for (size_t i = 0; i < turns.size(); ++i) {
    const Turn& t = turns[i];
    const std::string id = "geometry.turns[" + std::to_string(i) + "]";
    Require(t.radius > 0.0, id + ".radius must be > 0");
    Require(t.trace_width > 0.0, id + ".trace_width must be > 0");
    Require(t.trace_thickness > 0.0, id + ".trace_thickness must be > 0");
    Require(std::isfinite(t.z_offset), id + ".z_offset must be finite");
    Require(t.trace_width / 2.0 < t.radius,
            id + ".trace_width must be < 2 * radius");
    if (i > 0) {
      Require(t.radius > turns[i - 1].radius,
              "geometry.turns radii must be strictly increasing");
    }
  }
}

double LoopGeometry::FilamentSpacing() const {
  double spacing = std::numeric_limits<double>::infinity();
  for (const Turn& t : turns) {
    spacing = std::min(spacing, t.trace_width / filaments_across_width);
    spacing = std::min(spacing, t.trace_thickness / filaments_across_thickness);
  }
  return spacing;
}

Vec3 NVFrame::Axis() const {
  return {std::sin(axis_tilt) * std::cos(azimuth),
          std::sin(axis_tilt) * std::sin(azimuth), std::cos(axis_tilt)};
}

void NVFrame::Validate() const {
  Require(axis_tilt >= 0.0 && axis_tilt <= kPi / 2.0,
          "frame.axis_tilt must be in [0, pi/2]");
  Require(std::isfinite(azimuth), "frame.azimuth must be finite");
}

void EvalPlane::Validate() const {
  Require(standoff_height > 0.0, "plane.standoff_height must be > 0");
  Require(pixel_pitch > 0.0, "plane.pixel_pitch must be > 0");
  Require(extent_x >= pixel_pitch && extent_y >= pixel_pitch,
          "plane.extent must be >= pixel_pitch");
}

int EvalPlane::PixelsX() const {
  return static_cast<int>(std::floor(extent_x / pixel_pitch + 1e-9)) + 1;
}

int EvalPlane::PixelsY() const {
  return static_cast<int>(std::floor(extent_y / pixel_pitch + 1e-9)) + 1;
}

Vec3 BiotSavart(const Vec3& point, const LoopGeometry& geometry,
                double current) {
  const int nw = geometry.filaments_across_width;
  const int nt = geometry.filaments_across_thickness;
  const double clearance = geometry.FilamentSpacing();
  const double rho = std::hypot(point.x(), point.y());

  Vec3 sum = Vec3::Zero();
  for (const Turn& turn : geometry.turns) {
    Vec3 turn_sum = Vec3::Zero();
    for (const Filament& f : BundleOf(turn, nw, nt)) {
      if (std::hypot(rho - f.radius, point.z() - f.z) < clearance) {
        throw ClearanceError("field point within filament spacing of a turn");
      }
      turn_sum += PolygonField(point, f.radius, f.z, geometry.segments_per_turn);
    }
    sum += turn_sum / (nw * nt);
  }
  return sum * (kMu0 * current / (4.0 * kPi));
}

double PerpProjection(const Vec3& b, const NVFrame& frame) {
  const Vec3 n = frame.Axis();
  return (b - b.dot(n) * n).norm();
}

double B1PerpAt(double x, double y, const LoopGeometry& geometry,
                const EvalPlane& plane, const NVFrame& frame, double current,
                const SpotModel& spot) {
  const double z = plane.standoff_height;
  if (!spot.enabled) {
    return PerpProjection(BiotSavart(Vec3(x, y, z), geometry, current), frame);
  }
  static const auto offsets = SpotOffsets();
  const double r = spot.diameter / 2.0;
  double sum = 0.0;
  for (const auto& o : offsets) {
    const Vec3 p(x + r * o[0], y + r * o[1], z);
    sum += PerpProjection(BiotSavart(p, geometry, current), frame);
  }
  return sum / static_cast<double>(offsets.size());
}

std::vector<double> SpotF1Samples(double x, double y,
                                  const LoopGeometry& geometry,
                                  const EvalPlane& plane, const NVFrame& frame,
                                  double diameter, double current,
                                  double gamma) {
  static const auto offsets = SpotOffsets();
  const double r = diameter / 2.0;
  std::vector<double> out;
  out.reserve(offsets.size());
  for (const auto& o : offsets) {
    const Vec3 p(x + r * o[0], y + r * o[1], plane.standoff_height);
    out.push_back(RabiFrequency(
        PerpProjection(BiotSavart(p, geometry, current), frame), gamma));
  }
  return out;
}

FieldMap F1Map(const LoopGeometry& geometry, const EvalPlane& plane,
               const NVFrame& frame, double current, const SpotModel& spot,
               double gamma) {
  geometry.Validate();
  plane.Validate();
  frame.Validate();

  FieldMap map;
  map.plane = plane;
  map.nx = plane.PixelsX();
  map.ny = plane.PixelsY();
  map.drive_current = current;
  map.pixels.resize(static_cast<size_t>(map.nx) * map.ny);
  const double cx = 0.5 * (map.nx - 1);
  const double cy = 0.5 * (map.ny - 1);
  for (int iy = 0; iy < map.ny; ++iy) {
    for (int ix = 0; ix < map.nx; ++ix) {
      FieldPixel& px = map.pixels[iy * map.nx + ix];
      px.x = (ix - cx) * plane.pixel_pitch;
      px.y = (iy - cy) * plane.pixel_pitch;
      try {
        px.b1_perp = B1PerpAt(px.x, px.y, geometry, plane, frame,
                              std::abs(current), spot);
        px.f1 = RabiFrequency(px.b1_perp, gamma);
      } catch (const ClearanceError&) {
        px.flagged = true;
      }
    }
  }
  return map;
}

Homogeneity ComputeHomogeneity(const FieldMap& map, double square_side) {
  Require(square_side > 0.0, "square_side must be > 0");
  Require(square_side <= map.plane.extent_x + 1e-12 &&
              square_side <= map.plane.extent_y + 1e-12,
          "square_side must be <= map extent");
  const double half = square_side / 2.0 * (1.0 + 1e-9);
  double sum = 0.0;
  int count = 0;
  for (const FieldPixel& px : map.pixels) {
    if (px.flagged || std::abs(px.x) > half || std::abs(px.y) > half) continue;
    sum += px.f1;
    ++count;
  }
  if (count == 0) throw NumericalError("homogeneity: empty pixel set");
  Homogeneity h;
  h.pixel_count = count;
  h.mean = sum / count;
  double var = 0.0;
  for (const FieldPixel& px : map.pixels) {
    if (px.flagged || std::abs(px.x) > half || std::abs(px.y) > half) continue;
    var += (px.f1 - h.mean) * (px.f1 - h.mean);
  }
  var /= count;
  h.normalized_std = h.mean > 0.0 ? std::sqrt(var) / h.mean : 0.0;
  return h;
}

double SelfInductance(double radius, double wire_radius) {
  Require(radius > 0.0 && wire_radius > 0.0 && wire_radius < radius,
          "self inductance needs 0 < wire_radius < radius");
  return kMu0 * radius * (std::log(8.0 * radius / wire_radius) - 2.0);
}

double EquivalentWireRadius(double width, double thickness) {
  return 0.2235 * (width + thickness);
}

double MutualInductance(double r1, double z1, double r2, double z2) {
  Require(r1 > 0.0 && r2 > 0.0, "mutual inductance radii must be > 0");
  const double d = z2 - z1;
  if (r1 == r2 && d == 0.0) {
    throw InvalidArgument("mutual inductance of coincident filaments diverges");
  }
  const double k2 = 4.0 * r1 * r2 / ((r1 + r2) * (r1 + r2) + d * d);
  const double k = std::sqrt(k2);
  const double kk = std::comp_ellint_1(k);
  const double ek = std::comp_ellint_2(k);
  return kMu0 * std::sqrt(r1 * r2) * ((2.0 / k - k) * kk - (2.0 / k) * ek);
}

double LoopInductance(const LoopGeometry& geometry) {
  geometry.Validate();
  const auto& turns = geometry.turns;
  for (size_t i = 0; i < turns.size(); ++i) {
    for (size_t j = i + 1; j < turns.size(); ++j) {
      const bool radial = std::abs(turns[i].radius - turns[j].radius) <
                          0.5 * (turns[i].trace_width + turns[j].trace_width);
      const bool axial = std::abs(turns[i].z_offset - turns[j].z_offset) <
                         0.5 * (turns[i].trace_thickness +
                                turns[j].trace_thickness);
      if (radial && axial) {
        throw InvalidArgument("geometry.turns " + std::to_string(i) + " and " +
                              std::to_string(j) + " overlap");
      }
    }
  }
  double total = 0.0;
  for (const Turn& t : turns) {
    total += SelfInductance(
        t.radius, EquivalentWireRadius(t.trace_width, t.trace_thickness));
  }
  for (size_t i = 0; i < turns.size(); ++i) {
    for (size_t j = i + 1; j < turns.size(); ++j) {
      total += 2.0 * MutualInductance(turns[i].radius, turns[i].z_offset,
                                      turns[j].radius, turns[j].z_offset);
    }
  }
  return total;
}

double OffsetRatio(const LoopGeometry& geometry, const EvalPlane& plane,
                   const NVFrame& frame, double offset, double direction,
                   const SpotModel& spot) {
  const double center = B1PerpAt(0.0, 0.0, geometry, plane, frame, 1.0, spot);
  const double off =
      B1PerpAt(offset * std::cos(direction), offset * std::sin(direction),
               geometry, plane, frame, 1.0, spot);
  return off / center;
}

double CalibrateStandoff(const LoopGeometry& geometry, const EvalPlane& plane,
                         const NVFrame& frame, double target_ratio,
                         double offset, double lo, double hi, double direction,
                         const SpotModel& spot) {
  Require(lo > 0.0 && hi > lo, "calibration bracket must satisfy 0 < lo < hi");
  auto residual = [&](double h) {
    EvalPlane p = plane;
    p.standoff_height = h;
    return OffsetRatio(geometry, p, frame, offset, direction, spot) -
           target_ratio;
  };
  constexpr int kScan = 64;
  double flo = residual(lo);
  bool bracketed = false;
  for (int k = 1; k <= kScan && !bracketed; ++k) {
    const double h = lo + (hi - lo) * k / kScan;
    const double fh = residual(h);
    if ((flo > 0.0) != (fh > 0.0)) {
      hi = h;
      bracketed = true;
    } else {
      lo = h;
      flo = fh;
    }
  }
  if (!bracketed) {
    throw NumericalError("standoff calibration: target ratio not bracketed");
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    const double fm = residual(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace nvloop::magnetics
