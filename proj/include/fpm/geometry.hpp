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

// LED-array position model and illumination wave vectors.
//
// LEDs sit on a square lattice of pitch d, rigidly translated by a global
// shift (dx, dy): x_{m,n} = m*d + dx, y_{m,n} = n*d + dy. Index m runs along
// x (image columns), n along y (image rows).

#ifndef FPM_GEOMETRY_HPP_
#define FPM_GEOMETRY_HPP_

#include <Eigen/Dense>
#include <compare>
#include <cstdlib>
#include <map>
#include <vector>

namespace fpm {

struct LedIndex {
  int m = 0;
  int n = 0;
  auto operator<=>(const LedIndex&) const = default;
};

// Global in-plane translation of the LED lattice, meters.
struct Shift2 {
  double dx = 0.0;
  double dy = 0.0;
  bool operator==(const Shift2&) const = default;
};

struct LedGeometry {
  double pitch = 4e-3;         // d, LED spacing (m)
  double distance = 113.5e-3;  // s, sample to array (m)
  Shift2 shift;                // global shift (m)
  int grid_half = 8;           // max |m|, |n|
  double wavelength = 629e-9;  // lambda (m)

  // Throws ConfigError on non-positive lengths or |shift| > pitch.
  void validate() const;
  int side() const { return 2 * grid_half + 1; }
  bool contains(LedIndex led) const {
    return std::abs(led.m) <= grid_half && std::abs(led.n) <= grid_half;
  }
  LedGeometry with_shift(Shift2 s) const {
    LedGeometry g = *this;
    g.shift = s;
    return g;
  }
};

// One field-of-view segment: centre in sample-plane coordinates and the LR /
// HR tile sides in pixels.
struct SegmentFrame {
  double x0 = 0.0;
  double y0 = 0.0;
  int hr_size = 512;
  int lr_size = 128;

  void validate() const;
  int upsample() const { return hr_size / lr_size; }
};

// Transverse angular spatial frequency of an illuminating plane wave (rad/m).
struct WaveVector {
  double kx = 0.0;
  double ky = 0.0;
  bool operator==(const WaveVector&) const = default;
};

using WaveVectorMap = std::map<LedIndex, WaveVector>;
using PositionMap = std::map<LedIndex, Eigen::Vector2d>;

// (m*d + dx, n*d + dy). Throws RangeError outside the grid.
Eigen::Vector2d led_position(LedIndex led, const LedGeometry& geom);

WaveVector wave_vector(LedIndex led, const LedGeometry& geom,
                       const SegmentFrame& seg);

// Wave vector of an LED at an explicit position (used for per-LED models).
WaveVector wave_vector_at(const Eigen::Vector2d& position,
                          const LedGeometry& geom, const SegmentFrame& seg);

// Inverse of wave_vector_at: LED position that produces `wv`.
Eigen::Vector2d position_from_wave_vector(const WaveVector& wv,
                                          const LedGeometry& geom,
                                          const SegmentFrame& seg);

// |k| * lambda / (2 pi).
double direction_sine(const WaveVector& wv, double wavelength);

struct BrightFieldSet {
  std::vector<LedIndex> leds;
  int side = 0;  // smallest centred square containing the set (R2)
};

// LEDs whose illumination direction sine does not exceed the objective NA.
// Throws ConfigError for an NA outside (0, 1) or an empty set.
BrightFieldSet bright_field_set(const LedGeometry& geom, double objective_na,
                                const SegmentFrame& seg);

// All LEDs of the centred square of side 2*half+1, ordered centre-out:
// by ring max(|m|,|n|), row-major inside a ring.
std::vector<LedIndex> square_range(int half);

WaveVectorMap wave_vectors(const LedGeometry& geom, const SegmentFrame& seg,
                           const std::vector<LedIndex>& leds);

PositionMap lattice_positions(const LedGeometry& geom,
                              const std::vector<LedIndex>& leds);

// Spectral pixel size (rad/m) of an n-pixel grid with real-space pitch p.
inline double spectral_pixel(int size, double pitch) {
  return 2.0 * 3.14159265358979323846 / (double(size) * pitch);
}

// Nearest-pixel spectral offset (col, row) of a wave vector.
struct PixelOffset {
  int col = 0;
  int row = 0;
  bool operator==(const PixelOffset&) const = default;
};
PixelOffset pixel_offset(const WaveVector& wv, int size, double pitch);

}  // namespace fpm

#endif  // FPM_GEOMETRY_HPP_
