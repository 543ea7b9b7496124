// Copyright 2026 The fpmcorr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fpm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fpm/error.hpp"

namespace fpm {

void LedGeometry::validate() const {
  if (!(pitch > 0) || !(distance > 0) || !(wavelength > 0))
    throw ConfigError("LED pitch, distance and wavelength must be positive");
  if (grid_half < 0) throw ConfigError("grid_half must be non-negative");
  if (std::abs(shift.dx) > pitch || std::abs(shift.dy) > pitch)
    throw ConfigError("global shift must lie within [-d, d] on each axis");
}

void SegmentFrame::validate() const {
  if (lr_size < 2 || hr_size < 2 || lr_size % 2 || hr_size % 2)
    throw ConfigError("tile sides must be even and at least 2");
  if (hr_size % lr_size != 0)
    throw ConfigError("hr_size must be an integer multiple of lr_size");
}

Eigen::Vector2d led_position(LedIndex led, const LedGeometry& geom) {
  if (!geom.contains(led))
    throw RangeError("LED (" + std::to_string(led.m) + "," +
                     std::to_string(led.n) + ") outside the array");
  return {led.m * geom.pitch + geom.shift.dx,
          led.n * geom.pitch + geom.shift.dy};
}

WaveVector wave_vector_at(const Eigen::Vector2d& position,
                          const LedGeometry& geom, const SegmentFrame& seg) {
  const double ux = seg.x0 - position.x();
  const double uy = seg.y0 - position.y();
  const double r = std::sqrt(ux * ux + uy * uy + geom.distance * geom.distance);
  const double k0 = 2.0 * std::numbers::pi / geom.wavelength;
  return {-k0 * ux / r, -k0 * uy / r};
}

WaveVector wave_vector(LedIndex led, const LedGeometry& geom,
                       const SegmentFrame& seg) {
  return wave_vector_at(led_position(led, geom), geom, seg);
}

Eigen::Vector2d position_from_wave_vector(const WaveVector& wv,
                                          const LedGeometry& geom,
                                          const SegmentFrame& seg) {
  const double k0 = 2.0 * std::numbers::pi / geom.wavelength;
  const double sx = wv.kx / k0;
  const double sy = wv.ky / k0;
  const double cz = std::sqrt(std::max(0.0, 1.0 - sx * sx - sy * sy));
  if (cz <= 0) throw ConfigError("wave vector is not a propagating wave");
  const double scale = geom.distance / cz;
  return {seg.x0 + sx * scale, seg.y0 + sy * scale};
}

double direction_sine(const WaveVector& wv, double wavelength) {
  return std::hypot(wv.kx, wv.ky) * wavelength / (2.0 * std::numbers::pi);
}

BrightFieldSet bright_field_set(const LedGeometry& geom, double objective_na,
                                const SegmentFrame& seg) {
  if (!(objective_na > 0 && objective_na < 1))
    throw ConfigError("objective NA must lie in (0, 1)");
  BrightFieldSet out;
  int half = -1;
  for (LedIndex led : square_range(geom.grid_half)) {
    if (direction_sine(wave_vector(led, geom, seg), geom.wavelength) <=
        objective_na) {
      out.leds.push_back(led);
      half = std::max({half, std::abs(led.m), std::abs(led.n)});
    }
  }
  if (out.leds.empty())
    throw ConfigError("no LED falls inside the objective bright field");
  out.side = 2 * half + 1;
  return out;
}

std::vector<LedIndex> square_range(int half) {
  std::vector<LedIndex> out;
  out.reserve(std::size_t(2 * half + 1) * std::size_t(2 * half + 1));
  for (int ring = 0; ring <= half; ++ring)
    for (int n = -ring; n <= ring; ++n)
      for (int m = -ring; m <= ring; ++m)
        if (std::max(std::abs(m), std::abs(n)) == ring) out.push_back({m, n});
  return out;
}

WaveVectorMap wave_vectors(const LedGeometry& geom, const SegmentFrame& seg,
                           const std::vector<LedIndex>& leds) {
  WaveVectorMap out;
  for (LedIndex led : leds) out.emplace(led, wave_vector(led, geom, seg));
  return out;
}

PositionMap lattice_positions(const LedGeometry& geom,
                              const std::vector<LedIndex>& leds) {
  PositionMap out;
  for (LedIndex led : leds) out.emplace(led, led_position(led, geom));
  return out;
}

PixelOffset pixel_offset(const WaveVector& wv, int size, double pitch) {
  const double dk = spectral_pixel(size, pitch);
  return {int(std::lround(wv.kx / dk)), int(std::lround(wv.ky / dk))};
}

}  // namespace fpm
